use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::ncpoly::{Color, Monomial};

use super::MapError;

/// Default cap on the total number of half-edges handed to brute force.
pub const DEFAULT_HALF_EDGE_CAP: usize = 20;

/// A vertex with cyclically ordered coloured half-edges, read from a word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Star {
    word: Monomial,
}

impl Star {
    pub fn from_monomial(q: &Monomial) -> Result<Star, MapError> {
        if q.is_unit() {
            return Err(MapError::ConstantStar);
        }
        Ok(Star { word: q.clone() })
    }

    pub fn word(&self) -> &Monomial {
        &self.word
    }

    pub fn degree(&self) -> usize {
        self.word.degree()
    }

    /// `(slot, colour)` in cyclic order, slot 0 distinguished.
    pub fn half_edges(&self) -> Vec<(usize, Color)> {
        self.word
            .letters()
            .iter()
            .enumerate()
            .map(|(s, &l)| (s, Color::from_index(l as usize)))
            .collect()
    }
}

/// Flattened half-edge data shared by face tracing and enumeration.
#[derive(Clone, Debug)]
struct Layout {
    color: Vec<u8>,
    star_of: Vec<usize>,
    /// Next half-edge around the same star.
    rotate: Vec<usize>,
    stars: usize,
}

impl Layout {
    fn new(stars: &[Star]) -> Layout {
        let mut color = Vec::new();
        let mut star_of = Vec::new();
        let mut rotate = Vec::new();
        for (s, star) in stars.iter().enumerate() {
            let base = color.len();
            let d = star.degree();
            for (k, &l) in star.word.letters().iter().enumerate() {
                color.push(l);
                star_of.push(s);
                rotate.push(base + (k + 1) % d);
            }
        }
        Layout {
            color,
            star_of,
            rotate,
            stars: stars.len(),
        }
    }

    fn len(&self) -> usize {
        self.color.len()
    }

    /// Number of cycles of `rotate ∘ matching`.
    fn faces(&self, matching: &[usize]) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut faces = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            faces += 1;
            let mut h = start;
            while !seen[h] {
                seen[h] = true;
                h = self.rotate[matching[h]];
            }
        }
        faces
    }

    fn connected(&self, matching: &[usize]) -> bool {
        let mut parent: Vec<usize> = (0..self.stars).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut components = self.stars;
        for (h, &g) in matching.iter().enumerate() {
            let a = find(&mut parent, self.star_of[h]);
            let b = find(&mut parent, self.star_of[g]);
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components == 1
    }

    fn genus_of(&self, matching: &[usize]) -> usize {
        let v = self.stars as i64;
        let e = (self.len() / 2) as i64;
        let f = self.faces(matching) as i64;
        let chi = v - e + f;
        debug_assert!(chi <= 2 && (2 - chi) % 2 == 0);
        ((2 - chi) / 2) as usize
    }
}

/// Stars together with a perfect matching of all their half-edges.
#[derive(Clone, Debug)]
pub struct PairedDiagram {
    stars: Vec<Star>,
    matching: Vec<usize>,
    layout: Layout,
}

impl PairedDiagram {
    /// `matching[h]` is the partner of global half-edge `h`, numbering
    /// half-edges star by star in slot order.
    pub fn new(stars: Vec<Star>, matching: Vec<usize>) -> Result<Self, MapError> {
        let layout = Layout::new(&stars);
        let n = layout.len();
        if matching.len() != n {
            return Err(MapError::InvalidMatching(format!(
                "{} partners for {n} half-edges",
                matching.len()
            )));
        }
        for (h, &g) in matching.iter().enumerate() {
            if g >= n || g == h || matching[g] != h {
                return Err(MapError::InvalidMatching(format!(
                    "half-edge {h} is not properly paired"
                )));
            }
            if layout.color[h] != layout.color[g] {
                return Err(MapError::InvalidMatching(format!(
                    "half-edges {h} and {g} have different colours"
                )));
            }
        }
        Ok(PairedDiagram {
            stars,
            matching,
            layout,
        })
    }

    pub fn stars(&self) -> &[Star] {
        &self.stars
    }

    pub fn matching(&self) -> &[usize] {
        &self.matching
    }

    pub fn is_connected(&self) -> bool {
        self.layout.connected(&self.matching)
    }

    pub fn faces(&self) -> usize {
        self.layout.faces(&self.matching)
    }

    /// `g = (2 − V + E − F) / 2`.
    pub fn genus(&self) -> Result<usize, MapError> {
        if !self.is_connected() {
            return Err(MapError::Disconnected);
        }
        Ok(self.layout.genus_of(&self.matching))
    }
}

/// Number of connected labelled maps per genus.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GenusCensus {
    pub counts: BTreeMap<usize, u64>,
}

impl GenusCensus {
    pub fn get(&self, genus: usize) -> u64 {
        self.counts.get(&genus).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    fn merge(mut self, other: GenusCensus) -> GenusCensus {
        for (g, c) in other.counts {
            *self.counts.entry(g).or_insert(0) += c;
        }
        self
    }
}

/// Counts of every colour-respecting matching, split by connectivity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchingTally {
    pub connected: GenusCensus,
    /// All matchings, connected or not, bucketed by face count.
    pub by_faces: BTreeMap<usize, u64>,
}

struct Search<'a> {
    layout: &'a Layout,
    matching: Vec<usize>,
    tally: MatchingTally,
    record_faces: bool,
}

const FREE: usize = usize::MAX;

impl Search<'_> {
    fn run(&mut self, from: usize) {
        let n = self.layout.len();
        let mut i = from;
        while i < n && self.matching[i] != FREE {
            i += 1;
        }
        if i == n {
            self.leaf();
            return;
        }
        for j in i + 1..n {
            if self.matching[j] == FREE && self.layout.color[j] == self.layout.color[i] {
                self.matching[i] = j;
                self.matching[j] = i;
                self.run(i + 1);
                self.matching[i] = FREE;
                self.matching[j] = FREE;
            }
        }
    }

    fn leaf(&mut self) {
        let faces = self.layout.faces(&self.matching);
        if self.record_faces {
            *self.tally.by_faces.entry(faces).or_insert(0) += 1;
        }
        if self.layout.connected(&self.matching) {
            let v = self.layout.stars as i64;
            let e = (self.layout.len() / 2) as i64;
            let g = ((2 - (v - e + faces as i64)) / 2) as usize;
            *self.tally.connected.counts.entry(g).or_insert(0) += 1;
        }
    }
}

fn parity_ok(layout: &Layout) -> bool {
    let mut counts = [0usize; 256];
    for &c in &layout.color {
        counts[c as usize] += 1;
    }
    counts.iter().all(|c| c % 2 == 0)
}

/// Enumerates every colour-respecting perfect matching of the stars'
/// half-edges. Work is split on the partner of half-edge 0.
pub fn enumerate_matchings(stars: &[Star], cap: usize, record_faces: bool) -> Result<MatchingTally, MapError> {
    let layout = Layout::new(stars);
    let n = layout.len();
    if n > cap {
        return Err(MapError::CapExceeded { half_edges: n, cap });
    }
    if n == 0 || !parity_ok(&layout) {
        return Ok(MatchingTally::default());
    }
    let first: Vec<usize> = (1..n).filter(|&j| layout.color[j] == layout.color[0]).collect();
    let parts: Vec<MatchingTally> = first
        .par_iter()
        .map(|&j| {
            let mut s = Search {
                layout: &layout,
                matching: vec![FREE; n],
                tally: MatchingTally::default(),
                record_faces,
            };
            s.matching[0] = j;
            s.matching[j] = 0;
            s.run(1);
            s.tally
        })
        .collect();
    Ok(parts.into_iter().fold(MatchingTally::default(), |acc, t| {
        let mut by_faces = acc.by_faces;
        for (f, c) in t.by_faces {
            *by_faces.entry(f).or_insert(0) += c;
        }
        MatchingTally {
            connected: acc.connected.merge(t.connected),
            by_faces,
        }
    }))
}

/// Connected maps built on the given labelled stars, bucketed by genus.
pub fn census(stars: &[Star]) -> Result<GenusCensus, MapError> {
    census_with_cap(stars, DEFAULT_HALF_EDGE_CAP)
}

pub fn census_with_cap(stars: &[Star], cap: usize) -> Result<GenusCensus, MapError> {
    Ok(enumerate_matchings(stars, cap, false)?.connected)
}

/// Census for stars read from words.
pub fn census_of_words(words: &[Monomial], cap: usize) -> Result<GenusCensus, MapError> {
    let stars = words.iter().map(Star::from_monomial).collect::<Result<Vec<_>, _>>()?;
    census_with_cap(&stars, cap)
}
