//! The fixed 49-tag taxonomy used by every label file, checkpoint and report.

use std::fmt;

/// Number of tags in the vocabulary; every persisted label vector is this wide.
pub const NUM_TAGS: usize = 49;

/// Top-level grouping of the taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TagGroup {
    Topography,
    NaturalEnvironment,
    HumanUse,
    HumanHabitat,
    Communications,
}

impl TagGroup {
    pub const ALL: [TagGroup; 5] = [
        TagGroup::Topography,
        TagGroup::NaturalEnvironment,
        TagGroup::HumanUse,
        TagGroup::HumanHabitat,
        TagGroup::Communications,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TagGroup::Topography => "Topography",
            TagGroup::NaturalEnvironment => "Natural environment",
            TagGroup::HumanUse => "Human use",
            TagGroup::HumanHabitat => "Human habitat",
            TagGroup::Communications => "Communications",
        }
    }
}

impl fmt::Display for TagGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tag {
    pub index: usize,
    pub name: &'static str,
    pub group: TagGroup,
}

// Row order defines the tag index.
const BUILTIN: [(&str, TagGroup); NUM_TAGS] = {
    use TagGroup::*;
    [
        ("Coastal", Topography),
        ("Islands", Topography),
        ("Flat landscapes", Topography),
        ("Lowlands", Topography),
        ("Uplands", Topography),
        ("Geological interest", Topography),
        ("Air, Sky, Weather", NaturalEnvironment),
        ("Estuary, Marine", NaturalEnvironment),
        ("Lakes, Wetland, Bog", NaturalEnvironment),
        ("Rivers, Streams, Drainage", NaturalEnvironment),
        ("Grassland", NaturalEnvironment),
        ("Rocks, Scree, Cliffs", NaturalEnvironment),
        ("Barren Plateaux", NaturalEnvironment),
        ("Moorland", NaturalEnvironment),
        ("Heath, Scrub", NaturalEnvironment),
        ("Woodland, Forest", NaturalEnvironment),
        ("Wild Animals, Plants and Mushrooms", NaturalEnvironment),
        ("Farm, Fishery, Market Gardening", HumanUse),
        ("Quarrying, Mining", HumanUse),
        ("Water resources", HumanUse),
        ("Energy infrastructure", HumanUse),
        ("Country estates", HumanUse),
        ("Industry", HumanUse),
        ("Defence, Military", HumanUse),
        ("Construction, Development", HumanUse),
        ("Business, Retail, Services", HumanUse),
        ("Sport, Leisure", HumanUse),
        ("Waste, Waste management", HumanUse),
        ("Derelict, Disused", HumanUse),
        ("City, Town centre", HumanHabitat),
        ("Suburb, Urban fringe", HumanHabitat),
        ("Village, Rural settlement", HumanHabitat),
        ("Park and Public Gardens", HumanHabitat),
        ("Public buildings and spaces", HumanHabitat),
        ("Housing, Dwellings", HumanHabitat),
        ("Educational sites", HumanHabitat),
        ("Health and social services", HumanHabitat),
        ("Historic sites and artefacts", HumanHabitat),
        ("Religious sites", HumanHabitat),
        ("Boundary, Barrier", HumanHabitat),
        ("People, Events", HumanHabitat),
        ("Burial ground, Crematorium", HumanHabitat),
        ("Canals", Communications),
        ("Docks, Harbours", Communications),
        ("Railways", Communications),
        ("Paths", Communications),
        ("Roads, Road transport", Communications),
        ("Air transport", Communications),
        ("Communications", Communications),
    ]
};

/// Ordered index <-> name mapping of the tag taxonomy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagVocabulary {
    entries: Vec<Tag>,
}

impl TagVocabulary {
    /// The built-in 49-tag vocabulary, `Coastal` = 0 through `Communications` = 48.
    pub fn builtin() -> Self {
        let entries = BUILTIN
            .iter()
            .enumerate()
            .map(|(index, &(name, group))| Tag { index, name, group })
            .collect();
        TagVocabulary { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Tag] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> Option<&Tag> {
        self.entries.get(index)
    }

    pub fn name(&self, index: usize) -> Option<&'static str> {
        self.entries.get(index).map(|t| t.name)
    }

    /// Exact, case-sensitive lookup of a tag name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|t| t.name == name)
    }

    pub fn group_size(&self, group: TagGroup) -> usize {
        self.entries.iter().filter(|t| t.group == group).count()
    }
}

impl Default for TagVocabulary {
    fn default() -> Self {
        Self::builtin()
    }
}
