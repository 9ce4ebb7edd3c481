//! Ordnance Survey National Grid references (`TQ3080`, `NN 12 34`, ...).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridRefError {
    #[error("empty grid reference")]
    EmptyInput,
    #[error("invalid 100-km square letters in {0:?}")]
    BadSquareLetters(String),
    #[error("grid reference {0:?} has an odd number of digits")]
    OddDigitCount(String),
    #[error("grid reference {0:?} must have 2 to 10 digits")]
    DigitCount(String),
    #[error("unexpected character in grid reference {0:?}")]
    BadCharacter(String),
    #[error("easting {easting} / northing {northing} outside the national grid")]
    OutOfGrid { easting: f64, northing: f64 },
}

/// Width of the grid in 100-km squares (easting) and height (northing).
const GRID_SQUARES_E: u32 = 7;
const GRID_SQUARES_N: u32 = 13;

/// A parsed grid reference: a 100-km square plus the south-west corner of a
/// cell of `resolution` metres inside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridRef {
    letters: [u8; 2],
    easting_within: u32,
    northing_within: u32,
    resolution: u32,
}

// Position of a letter in the 25-letter grid alphabet (no 'I').
fn letter_index(c: u8) -> Option<u32> {
    match c {
        b'A'..=b'H' => Some((c - b'A') as u32),
        b'J'..=b'Z' => Some((c - b'A') as u32 - 1),
        _ => None,
    }
}

fn index_letter(i: u32) -> u8 {
    let c = b'A' + i as u8;
    if c >= b'I' {
        c + 1
    } else {
        c
    }
}

/// 100-km square offsets `(e, n)` of a letter pair, in units of 100 km.
fn square_offsets(letters: [u8; 2]) -> Option<(u32, u32)> {
    let l1 = letter_index(letters[0])? as i32;
    let l2 = letter_index(letters[1])? as i32;
    let e = ((l1 - 2).rem_euclid(5)) * 5 + l2 % 5;
    let n = (19 - (l1 / 5) * 5) - l2 / 5;
    if (0..GRID_SQUARES_E as i32).contains(&e) && (0..GRID_SQUARES_N as i32).contains(&n) {
        Some((e as u32, n as u32))
    } else {
        None
    }
}

// Inverse of `square_offsets`.
fn square_letters(e: u32, n: u32) -> [u8; 2] {
    let rows = 19 - n;
    let first = (rows / 5) * 5 + (e / 5 + 2) % 5;
    let second = (rows % 5) * 5 + e % 5;
    [index_letter(first), index_letter(second)]
}

impl GridRef {
    /// Builds a reference from full easting/northing in metres, snapped down
    /// to a cell of `resolution` metres.
    pub fn from_easting_northing(
        easting: f64,
        northing: f64,
        resolution: u32,
    ) -> Result<Self, GridRefError> {
        let out = GridRefError::OutOfGrid { easting, northing };
        if !(easting.is_finite() && northing.is_finite()) || easting < 0.0 || northing < 0.0 {
            return Err(out);
        }
        let (e, n) = (easting.floor() as u64, northing.floor() as u64);
        if e >= GRID_SQUARES_E as u64 * 100_000 || n >= GRID_SQUARES_N as u64 * 100_000 {
            return Err(out);
        }
        let res = resolution.clamp(1, 100_000) as u64;
        let (e, n) = (e / res * res, n / res * res);
        Ok(GridRef {
            letters: square_letters((e / 100_000) as u32, (n / 100_000) as u32),
            easting_within: (e % 100_000) as u32,
            northing_within: (n % 100_000) as u32,
            resolution: res as u32,
        })
    }

    pub fn letters(&self) -> &str {
        std::str::from_utf8(&self.letters).expect("grid letters are ASCII")
    }

    pub fn easting_within(&self) -> u32 {
        self.easting_within
    }

    pub fn northing_within(&self) -> u32 {
        self.northing_within
    }

    /// Cell size in metres.
    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Full easting and northing of the cell's south-west corner, in metres.
    pub fn easting_northing(&self) -> (u32, u32) {
        let (e, n) = square_offsets(self.letters).expect("validated at construction");
        (
            e * 100_000 + self.easting_within,
            n * 100_000 + self.northing_within,
        )
    }

    /// Full easting and northing of the cell centroid, in metres.
    pub fn centroid(&self) -> (f64, f64) {
        let (e, n) = self.easting_northing();
        let half = self.resolution as f64 / 2.0;
        (e as f64 + half, n as f64 + half)
    }

    fn digits_per_axis(&self) -> usize {
        let mut r = self.resolution;
        let mut d = 5;
        while r > 1 {
            r /= 10;
            d -= 1;
        }
        d
    }
}

/// Parses a grid reference such as `TQ3080` or `TQ 30 80`.
pub fn parse_gridref(text: &str) -> Result<GridRef, GridRefError> {
    let compact: Vec<u8> = text
        .bytes()
        .filter(|b| !b.is_ascii_whitespace())
        .map(|b| b.to_ascii_uppercase())
        .collect();
    if compact.is_empty() {
        return Err(GridRefError::EmptyInput);
    }
    if compact.len() < 2 || !compact[..2].iter().all(u8::is_ascii_alphabetic) {
        return Err(GridRefError::BadSquareLetters(text.to_string()));
    }
    let letters = [compact[0], compact[1]];
    if square_offsets(letters).is_none() {
        return Err(GridRefError::BadSquareLetters(text.to_string()));
    }
    let digits = &compact[2..];
    if !digits.iter().all(u8::is_ascii_digit) {
        return Err(GridRefError::BadCharacter(text.to_string()));
    }
    if digits.len() % 2 == 1 {
        return Err(GridRefError::OddDigitCount(text.to_string()));
    }
    if digits.is_empty() || digits.len() > 10 {
        return Err(GridRefError::DigitCount(text.to_string()));
    }
    let half = digits.len() / 2;
    let resolution = 10u32.pow(5 - half as u32);
    let value = |ds: &[u8]| {
        ds.iter()
            .fold(0u32, |acc, &d| acc * 10 + (d - b'0') as u32)
            * resolution
    };
    Ok(GridRef {
        letters,
        easting_within: value(&digits[..half]),
        northing_within: value(&digits[half..]),
        resolution,
    })
}

impl FromStr for GridRef {
    type Err = GridRefError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_gridref(s)
    }
}

impl fmt::Display for GridRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.digits_per_axis();
        f.write_str(self.letters())?;
        if d > 0 {
            let scale = self.resolution;
            write!(
                f,
                "{:0w$}{:0w$}",
                self.easting_within / scale,
                self.northing_within / scale,
                w = d
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_one_km_reference() {
        let g = parse_gridref("TQ3080").unwrap();
        assert_eq!(g.letters(), "TQ");
        assert_eq!(g.easting_within(), 30_000);
        assert_eq!(g.northing_within(), 80_000);
        assert_eq!(g.resolution(), 1000);
        assert_eq!(g.easting_northing(), (530_000, 180_000));
        assert_eq!(g.centroid(), (530_500.0, 180_500.0));
    }

    #[test]
    fn whitespace_insensitive() {
        assert_eq!(parse_gridref("TQ 30 80"), parse_gridref("TQ3080"));
        assert_eq!(parse_gridref(" tq3080 "), parse_gridref("TQ3080"));
    }

    #[test]
    fn rejects_letter_i_and_off_grid_squares() {
        assert!(matches!(
            parse_gridref("TI0000"),
            Err(GridRefError::BadSquareLetters(_))
        ));
        assert!(matches!(
            parse_gridref("AA0000"),
            Err(GridRefError::BadSquareLetters(_))
        ));
    }

    #[test]
    fn rejects_bad_digit_counts() {
        assert_eq!(parse_gridref(""), Err(GridRefError::EmptyInput));
        assert!(matches!(
            parse_gridref("TQ308"),
            Err(GridRefError::OddDigitCount(_))
        ));
        assert!(matches!(parse_gridref("TQ"), Err(GridRefError::DigitCount(_))));
        assert!(matches!(
            parse_gridref("TQ123456789012"),
            Err(GridRefError::DigitCount(_))
        ));
        assert!(matches!(
            parse_gridref("TQ30x0"),
            Err(GridRefError::BadCharacter(_))
        ));
    }

    #[test]
    fn known_square_offsets() {
        // Well-known squares: SV is the false origin, HP covers Shetland.
        assert_eq!(parse_gridref("SV0000").unwrap().easting_northing(), (0, 0));
        assert_eq!(
            parse_gridref("HP0000").unwrap().easting_northing(),
            (400_000, 1_200_000)
        );
        assert_eq!(
            parse_gridref("NN1234").unwrap().easting_northing(),
            (212_000, 734_000)
        );
        assert_eq!(
            parse_gridref("TG5131").unwrap().easting_northing(),
            (651_000, 331_000)
        );
    }

    #[test]
    fn ten_figure_reference() {
        let g = parse_gridref("NN 16650 71250").unwrap();
        assert_eq!(g.resolution(), 1);
        assert_eq!(g.easting_northing(), (216_650, 771_250));
    }

    #[test]
    fn numeric_fallback_matches_letters() {
        let g = GridRef::from_easting_northing(530_123.0, 180_999.0, 1000).unwrap();
        assert_eq!(g, parse_gridref("TQ3080").unwrap());
        assert!(GridRef::from_easting_northing(-1.0, 0.0, 1000).is_err());
        assert!(GridRef::from_easting_northing(700_000.0, 0.0, 1000).is_err());
    }

    proptest! {
        #[test]
        fn format_then_parse_is_identity(
            e in 0u32..700_000,
            n in 0u32..1_300_000,
            digits in 1u32..=5,
        ) {
            let res = 10u32.pow(5 - digits);
            let g = GridRef::from_easting_northing(e as f64, n as f64, res).unwrap();
            let text = g.to_string();
            prop_assert_eq!(text.len(), 2 + 2 * digits as usize);
            prop_assert_eq!(parse_gridref(&text).unwrap(), g);
        }
    }
}
