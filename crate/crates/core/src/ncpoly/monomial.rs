use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use super::NcError;

/// Largest supported number of matrix colours.
pub const MAX_COLORS: usize = 64;

/// A matrix colour, stored 0-based and rendered 1-based (`x1`, `x2`, ...).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Color(u8);

impl Color {
    /// Validates a 1-based colour against the colour count `m`.
    pub fn new(one_based: usize, m: usize) -> Result<Color, NcError> {
        if one_based == 0 || one_based > m || one_based > MAX_COLORS {
            return Err(NcError::ColorOutOfRange {
                color: one_based,
                colors: m,
            });
        }
        Ok(Color((one_based - 1) as u8))
    }

    /// 0-based constructor for internal loops over `0..m`.
    pub fn from_index(index: usize) -> Color {
        assert!(index < MAX_COLORS, "colour index {index} out of range");
        Color(index as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn all(m: usize) -> impl Iterator<Item = Color> {
        (0..m).map(Color::from_index)
    }
}

/// A word in the letters `X_1..X_m`; the empty word is the unit.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[u8; 16]>);

impl Monomial {
    pub fn unit() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn letter(c: Color) -> Self {
        Monomial(SmallVec::from_slice(&[c.0]))
    }

    /// Builds a word from 0-based colour indices.
    pub fn from_indices(letters: &[u8]) -> Self {
        assert!(letters.iter().all(|&l| (l as usize) < MAX_COLORS));
        Monomial(SmallVec::from_slice(letters))
    }

    /// `X_c^p`.
    pub fn power(c: Color, p: usize) -> Self {
        Monomial(std::iter::repeat_n(c.0, p).collect())
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    /// Highest colour used, as a colour count (0 for the unit).
    pub fn colors_used(&self) -> usize {
        self.0.iter().map(|&l| l as usize + 1).max().unwrap_or(0)
    }

    pub fn concat(&self, other: &Monomial) -> Monomial {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Monomial(v)
    }

    pub fn concat3(a: &[u8], b: &[u8], c: &[u8]) -> Monomial {
        let mut v: SmallVec<[u8; 16]> = SmallVec::with_capacity(a.len() + b.len() + c.len());
        v.extend_from_slice(a);
        v.extend_from_slice(b);
        v.extend_from_slice(c);
        Monomial(v)
    }

    pub fn reversed(&self) -> Monomial {
        Monomial(self.0.iter().rev().copied().collect())
    }

    /// Count of each colour, indexed 0-based.
    pub fn color_counts(&self, m: usize) -> Vec<usize> {
        let mut counts = vec![0; m.max(self.colors_used())];
        for &l in &self.0 {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Lexicographically least rotation.
    pub fn cyclic_canonical(&self) -> Monomial {
        let n = self.0.len();
        if n < 2 {
            return self.clone();
        }
        let s = &self.0;
        let mut best = 0;
        for start in 1..n {
            for k in 0..n {
                let a = s[(start + k) % n];
                let b = s[(best + k) % n];
                if a != b {
                    if a < b {
                        best = start;
                    }
                    break;
                }
            }
        }
        if best == 0 {
            return self.clone();
        }
        Monomial(s[best..].iter().chain(s[..best].iter()).copied().collect())
    }

    /// Splits `self = R X_c S` at every occurrence of colour `c`.
    pub fn splits(&self, c: Color) -> impl Iterator<Item = (&[u8], &[u8])> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == c.0)
            .map(move |(p, _)| (&self.0[..p], &self.0[p + 1..]))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.0.len() {
            let l = self.0[i];
            let mut run = 1;
            while i + run < self.0.len() && self.0[i + run] == l {
                run += 1;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", l + 1)?;
            if run > 1 {
                write!(f, "^{run}")?;
            }
            i += run;
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &[u8]) -> Monomial {
        Monomial::from_indices(s)
    }

    #[test]
    fn canonical_rotation() {
        assert_eq!(w(&[1, 0]).cyclic_canonical(), w(&[0, 1]));
        assert_eq!(w(&[0, 1, 0, 1]).cyclic_canonical(), w(&[0, 1, 0, 1]));
        assert_eq!(Monomial::unit().cyclic_canonical(), Monomial::unit());
        assert_eq!(w(&[1, 0, 0, 1, 0]).cyclic_canonical(), w(&[0, 0, 1, 0, 1]));
    }

    #[test]
    fn all_rotations_share_a_key() {
        let word = w(&[2, 0, 1, 0, 0, 2, 1]);
        let key = word.cyclic_canonical();
        for r in 0..word.degree() {
            let rot = Monomial::concat3(&word.letters()[r..], &word.letters()[..r], &[]);
            assert_eq!(rot.cyclic_canonical(), key);
        }
    }

    #[test]
    fn display_groups_powers() {
        assert_eq!(w(&[0, 0, 1, 0]).to_string(), "x1^2*x2*x1");
        assert_eq!(Monomial::unit().to_string(), "1");
    }

    #[test]
    fn colour_validation() {
        assert!(Color::new(2, 2).is_ok());
        assert!(matches!(Color::new(3, 2), Err(NcError::ColorOutOfRange { .. })));
        assert!(Color::new(0, 2).is_err());
    }
}
