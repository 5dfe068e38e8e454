//! Tiles and bi-tiles of the Walsh phase plane, plus the choice function that
//! linearizes the maximal operator.
//!
//! A tile is a dyadic time-frequency rectangle of area 1, a bi-tile one of
//! area 2.  Time intervals live inside `[0,1]`; frequency intervals are
//! dyadic blocks of the nonnegative axis.  Text form is `s:m:n` (scale, time
//! index, frequency index).

use std::fmt;
use std::str::FromStr;

use crate::dyadic::LacunarySequence;
use crate::error::Error;

/// Largest tile scale accepted by parsers; keeps every edge computation in u64.
pub const MAX_TILE_SCALE: u8 = 32;

/// Dyadic interval `[index·2^-scale, (index+1)·2^-scale) ⊆ [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    pub scale: u8,
    pub index: u32,
}

impl DyadicInterval {
    pub fn new(scale: u8, index: u32) -> Result<Self, Error> {
        if scale > MAX_TILE_SCALE {
            return Err(Error::BadTile(format!("scale {scale} too large")));
        }
        if (index as u64) >= 1u64 << scale {
            return Err(Error::BadTile(format!(
                "time index {index} out of range at scale {scale}"
            )));
        }
        Ok(Self { scale, index })
    }

    pub fn unit() -> Self {
        Self { scale: 0, index: 0 }
    }

    pub fn length(&self) -> f64 {
        f64::powi(2.0, -(self.scale as i32))
    }

    pub fn left(&self) -> f64 {
        self.index as f64 * self.length()
    }

    /// `self ⊆ other`.
    pub fn contained_in(&self, other: &Self) -> bool {
        self.scale >= other.scale && (self.index >> (self.scale - other.scale)) == other.index
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.contained_in(other) || other.contained_in(self)
    }

    /// The ancestor at a coarser scale.
    pub fn ancestor(&self, scale: u8) -> Result<Self, Error> {
        if scale > self.scale {
            return Err(Error::BadTile(format!(
                "ancestor scale {scale} finer than {}",
                self.scale
            )));
        }
        Ok(Self {
            scale,
            index: self.index >> (self.scale - scale),
        })
    }

    /// Range of fine cells covered at resolution `K` (requires `scale ≤ K`).
    pub fn cells(&self, resolution: u8) -> std::ops::Range<usize> {
        let width = 1usize << (resolution - self.scale);
        let start = self.index as usize * width;
        start..start + width
    }

    pub fn contains_cell(&self, cell: usize, resolution: u8) -> bool {
        self.scale <= resolution && (cell >> (resolution - self.scale)) as u32 == self.index
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.scale, self.index)
    }
}

impl FromStr for DyadicInterval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut it = s.split(':');
        let scale = parse_field(it.next(), "scale")?;
        let index = parse_field(it.next(), "index")?;
        if it.next().is_some() {
            return Err(Error::Parse(format!("trailing fields in interval '{s}'")));
        }
        DyadicInterval::new(scale, index)
    }
}

/// Dyadic frequency block `[index·2^level, (index+1)·2^level)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreqInterval {
    pub level: u8,
    pub index: u64,
}

impl FreqInterval {
    pub fn new(level: u8, index: u64) -> Result<Self, Error> {
        if level > MAX_TILE_SCALE {
            return Err(Error::BadTile(format!("frequency level {level} too large")));
        }
        if index >= 1u64 << (63 - level) {
            return Err(Error::BadTile(format!("frequency index {index} too large")));
        }
        Ok(Self { level, index })
    }

    pub fn lower_edge(&self) -> u64 {
        self.index << self.level
    }

    pub fn upper_edge(&self) -> u64 {
        (self.index + 1) << self.level
    }

    pub fn length(&self) -> u64 {
        1u64 << self.level
    }

    /// `self ⊆ other`.
    pub fn contained_in(&self, other: &Self) -> bool {
        self.level <= other.level && (self.index >> (other.level - self.level)) == other.index
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.contained_in(other) || other.contained_in(self)
    }

    pub fn contains_freq(&self, n: u64) -> bool {
        n >= self.lower_edge() && n < self.upper_edge()
    }
}

impl fmt::Display for FreqInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.index)
    }
}

impl FromStr for FreqInterval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut it = s.split(':');
        let level = parse_field(it.next(), "level")?;
        let index = parse_field(it.next(), "index")?;
        if it.next().is_some() {
            return Err(Error::Parse(format!("trailing fields in block '{s}'")));
        }
        FreqInterval::new(level, index)
    }
}

fn parse_field<T: FromStr>(part: Option<&str>, name: &str) -> Result<T, Error> {
    part.ok_or_else(|| Error::Parse(format!("missing {name}")))?
        .parse::<T>()
        .map_err(|_| Error::Parse(format!("invalid {name}")))
}

/// Area-1 rectangle: time `[m·2^-s, (m+1)·2^-s)`, frequency
/// `[n·2^s, (n+1)·2^s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tile {
    pub time: DyadicInterval,
    pub freq_index: u64,
}

impl Tile {
    pub fn new(scale: u8, time_index: u32, freq_index: u64) -> Result<Self, Error> {
        let time = DyadicInterval::new(scale, time_index)?;
        let freq = FreqInterval::new(scale, freq_index)?;
        let _ = freq;
        Ok(Self { time, freq_index })
    }

    pub fn scale(&self) -> u8 {
        self.time.scale
    }

    pub fn freq(&self) -> FreqInterval {
        FreqInterval {
            level: self.time.scale,
            index: self.freq_index,
        }
    }

    /// `self < other` in the tile order: `I ⊆ I'` and `ω' ⊆ ω`.
    pub fn leq(&self, other: &Self) -> bool {
        self.time.contained_in(&other.time) && other.freq().contained_in(&self.freq())
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.time.intersects(&other.time) && self.freq().intersects(&other.freq())
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.time.scale, self.time.index, self.freq_index)
    }
}

impl FromStr for Tile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (scale, m, n) = parse_triple(s)?;
        Tile::new(scale, m, n)
    }
}

/// Area-2 rectangle: time `[m·2^-s, (m+1)·2^-s)`, frequency
/// `[n·2^{s+1}, (n+1)·2^{s+1})`, split into lower and upper halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BiTile {
    pub time: DyadicInterval,
    pub freq_index: u64,
}

impl BiTile {
    pub fn new(scale: u8, time_index: u32, freq_index: u64) -> Result<Self, Error> {
        let time = DyadicInterval::new(scale, time_index)?;
        if scale as u32 + 1 > MAX_TILE_SCALE as u32 {
            return Err(Error::BadTile(format!("scale {scale} too large for a bi-tile")));
        }
        let freq = FreqInterval::new(scale + 1, freq_index)?;
        let _ = freq;
        Ok(Self { time, freq_index })
    }

    pub fn scale(&self) -> u8 {
        self.time.scale
    }

    pub fn freq(&self) -> FreqInterval {
        FreqInterval {
            level: self.time.scale + 1,
            index: self.freq_index,
        }
    }

    pub fn lower(&self) -> Tile {
        Tile {
            time: self.time,
            freq_index: 2 * self.freq_index,
        }
    }

    pub fn upper(&self) -> Tile {
        Tile {
            time: self.time,
            freq_index: 2 * self.freq_index + 1,
        }
    }
}

impl fmt::Display for BiTile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.time.scale, self.time.index, self.freq_index)
    }
}

impl FromStr for BiTile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (scale, m, n) = parse_triple(s)?;
        BiTile::new(scale, m, n)
    }
}

fn parse_triple(s: &str) -> Result<(u8, u32, u64), Error> {
    let mut it = s.split(':');
    let scale = parse_field(it.next(), "scale")?;
    let m = parse_field(it.next(), "time index")?;
    let n = parse_field(it.next(), "frequency index")?;
    if it.next().is_some() {
        return Err(Error::Parse(format!("trailing fields in tile '{s}'")));
    }
    Ok((scale, m, n))
}

/// Reflexive partial order on bi-tiles: `I_P ⊆ I_{P'}` and `ω_{P'} ⊆ ω_P`.
pub fn bitile_leq(p: &BiTile, p2: &BiTile) -> bool {
    p.time.contained_in(&p2.time) && p2.freq().contained_in(&p.freq())
}

/// Strict variant of [`bitile_leq`].
pub fn bitile_lt(p: &BiTile, p2: &BiTile) -> bool {
    p != p2 && bitile_leq(p, p2)
}

/// Phase-plane intersection; for dyadic rectangles of these shapes this is
/// equivalent to comparability in the order.
pub fn bitiles_intersect(p: &BiTile, p2: &BiTile) -> bool {
    p.time.intersects(&p2.time) && p.freq().intersects(&p2.freq())
}

/// Tree top: time interval paired with a frequency block.  Real tops are
/// bi-tiles (block length `2·|I_T|^{-1}`); the degenerate area-1 top with
/// `I_T = [0,1]` is admitted so that scale-0 bi-tiles have nonzero size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeTop {
    pub time: DyadicInterval,
    pub omega: FreqInterval,
}

impl TreeTop {
    pub fn from_bitile(p: &BiTile) -> Self {
        Self {
            time: p.time,
            omega: p.freq(),
        }
    }

    /// Area-1 top over `[0,1]`.
    pub fn virtual_top(omega: FreqInterval) -> Self {
        Self {
            time: DyadicInterval::unit(),
            omega,
        }
    }

    pub fn is_virtual(&self) -> bool {
        self.omega.level == self.time.scale
    }

    /// `P < top`: `I_P ⊆ I_T` and `ω_T ⊆ ω_P`.
    pub fn admits(&self, p: &BiTile) -> bool {
        p.time.contained_in(&self.time) && self.omega.contained_in(&p.freq())
    }

    /// Size-eligible members: the lower tile misses the top rectangle, which
    /// for `P < top` means `ω_T ⊆ ω_{P_u}`.
    pub fn eligible(&self, p: &BiTile) -> bool {
        p.time.contained_in(&self.time) && self.omega.contained_in(&p.upper().freq())
    }

    pub fn top_length(&self) -> f64 {
        self.time.length()
    }
}

impl fmt::Display for TreeTop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.time, self.omega)
    }
}

impl FromStr for TreeTop {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let (time, omega) = s
            .split_once('@')
            .ok_or_else(|| Error::Parse(format!("missing '@' in top '{s}'")))?;
        let time: DyadicInterval = time.parse()?;
        let omega: FreqInterval = omega.parse()?;
        if omega.level != time.scale && omega.level != time.scale + 1 {
            return Err(Error::BadTile(format!(
                "top '{s}' is neither a bi-tile nor a degenerate area-1 top"
            )));
        }
        Ok(Self { time, omega })
    }
}

/// A set of bi-tiles below a common top.
#[derive(Debug, Clone)]
pub struct Tree {
    pub top: TreeTop,
    pub members: Vec<BiTile>,
}

impl Tree {
    pub fn new(top: TreeTop, mut members: Vec<BiTile>) -> Result<Self, Error> {
        members.sort();
        members.dedup();
        for m in &members {
            if !top.admits(m) {
                return Err(Error::BadTile(format!("member {m} not under top {top}")));
            }
        }
        Ok(Self { top, members })
    }

    /// Members whose lower half misses the top.
    pub fn eligible_members(&self) -> Vec<BiTile> {
        self.members
            .iter()
            .filter(|m| self.top.eligible(m))
            .copied()
            .collect()
    }

    pub fn top_length(&self) -> f64 {
        self.top.top_length()
    }
}

/// Tree cover witnessing an energy bound: `energy(P) ≤ Σ|I_T|`.
#[derive(Debug, Clone)]
pub struct EnergyCertificate {
    pub trees: Vec<Tree>,
    pub top_length_sum: f64,
}

impl EnergyCertificate {
    pub fn new(trees: Vec<Tree>) -> Self {
        let top_length_sum = trees.iter().map(Tree::top_length).sum();
        Self {
            trees,
            top_length_sum,
        }
    }

    /// Check the recorded sum and that the trees jointly cover `collection`.
    pub fn verify(&self, collection: &TileCollection) -> Result<(), Error> {
        let recomputed: f64 = self.trees.iter().map(Tree::top_length).sum();
        if (recomputed - self.top_length_sum).abs() > 1e-12 * (1.0 + recomputed.abs()) {
            return Err(Error::Precondition(format!(
                "certificate sum {} differs from recomputed {}",
                self.top_length_sum, recomputed
            )));
        }
        for p in collection.bitiles() {
            if !self
                .trees
                .iter()
                .any(|t| t.members.binary_search(p).is_ok())
            {
                return Err(Error::Precondition(format!("bi-tile {p} not covered")));
            }
        }
        Ok(())
    }
}

/// A finite set of bi-tiles, optionally carrying an energy certificate.
#[derive(Debug, Clone, Default)]
pub struct TileCollection {
    bitiles: Vec<BiTile>,
    pub certificate: Option<EnergyCertificate>,
}

impl TileCollection {
    pub fn new(mut bitiles: Vec<BiTile>) -> Self {
        bitiles.sort();
        bitiles.dedup();
        Self {
            bitiles,
            certificate: None,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn bitiles(&self) -> &[BiTile] {
        &self.bitiles
    }

    pub fn len(&self) -> usize {
        self.bitiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bitiles.is_empty()
    }

    pub fn contains(&self, p: &BiTile) -> bool {
        self.bitiles.binary_search(p).is_ok()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v = self.bitiles.clone();
        v.extend_from_slice(&other.bitiles);
        Self::new(v)
    }

    /// Partition by a predicate, preserving order.
    pub fn partition<F: Fn(&BiTile) -> bool>(&self, pred: F) -> (Self, Self) {
        let (yes, no): (Vec<_>, Vec<_>) = self.bitiles.iter().partition(|p| pred(p));
        (
            Self::new(yes.into_iter().copied().collect()),
            Self::new(no.into_iter().copied().collect()),
        )
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.bitiles.iter().map(|p| p.to_string()).collect()
    }

    pub fn from_strings(strings: &[String]) -> Result<Self, Error> {
        let bitiles = strings
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<BiTile>, Error>>()?;
        Ok(Self::new(bitiles))
    }
}

/// The measurable linearization `N(x)`: one frequency per fine cell, values
/// restricted to a lacunary sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiceFunction {
    resolution: u8,
    assignment: Vec<u64>,
}

impl ChoiceFunction {
    pub fn new(resolution: u8, assignment: Vec<u64>, seq: &LacunarySequence) -> Result<Self, Error> {
        if assignment.len() != 1usize << resolution {
            return Err(Error::LengthMismatch {
                resolution,
                got: assignment.len(),
            });
        }
        for (i, n) in assignment.iter().enumerate() {
            if !seq.contains(*n) {
                return Err(Error::BadChoice(format!(
                    "value {n} at cell {i} is not a sequence term"
                )));
            }
        }
        Ok(Self {
            resolution,
            assignment,
        })
    }

    pub fn constant(resolution: u8, n: u64, seq: &LacunarySequence) -> Result<Self, Error> {
        Self::new(resolution, vec![n; 1 << resolution], seq)
    }

    pub fn resolution(&self) -> u8 {
        self.resolution
    }

    pub fn assignment(&self) -> &[u64] {
        &self.assignment
    }

    pub fn value(&self, cell: usize) -> u64 {
        self.assignment[cell]
    }
}
