//! The Walsh phase plane: wave packets, the discretized lacunary Carleson
//! operator, the bilinear form, and the dense/size functionals.
//!
//! The master identity of the module: over the full enumerated bi-tile
//! collection, `Cf(x) = S⁻_{N(x)} f(x)` pointwise (half-open partial sums).

use std::cell::RefCell;
use std::collections::HashMap;
use std::collections::BTreeMap;
use std::rc::Rc;

use crate::dyadic::{walsh_sign, DyadicFunction, LacunarySequence};
use crate::error::Error;
use crate::tiles::{
    BiTile, ChoiceFunction, DyadicInterval, FreqInterval, Tile, TileCollection, TreeTop,
};

/// The wave packet `w_p = |I|^{-1/2} W_n(|I|^{-1}(x − left(I)))`, supported on
/// `I` with unit L² norm.  Requires the frequency content to be cell-constant
/// at resolution `K`: `freq_index < 2^{K−s}`.
pub fn wave_packet(p: &Tile, resolution: u8) -> Result<DyadicFunction, Error> {
    let s = p.scale();
    if s > resolution || p.freq_index >= 1u64 << (resolution - s) {
        return Err(Error::FrequencyTooHigh {
            n: p.freq_index,
            resolution,
        });
    }
    let mut values = vec![0.0; 1 << resolution];
    let local_res = resolution - s;
    let height = f64::powi(2.0, s as i32).sqrt();
    let start = (p.time.index as usize) << local_res;
    for (i_loc, v) in values[start..start + (1 << local_res)].iter_mut().enumerate() {
        *v = height * walsh_sign(p.freq_index, i_loc as u64, local_res) as f64;
    }
    DyadicFunction::new(resolution, values)
}

/// Per-run cache of localized Walsh transforms, keyed by the time interval.
/// One local butterfly per interval serves every tile over that interval.
pub struct PacketCache<'a> {
    f: &'a DyadicFunction,
    memo: RefCell<HashMap<DyadicInterval, Rc<Vec<f64>>>>,
}

impl<'a> PacketCache<'a> {
    pub fn new(f: &'a DyadicFunction) -> Self {
        Self {
            f,
            memo: RefCell::new(HashMap::new()),
        }
    }

    pub fn function(&self) -> &'a DyadicFunction {
        self.f
    }

    fn local_coeffs(&self, interval: DyadicInterval) -> Rc<Vec<f64>> {
        if let Some(hit) = self.memo.borrow().get(&interval) {
            return Rc::clone(hit);
        }
        let k = self.f.resolution();
        let local_res = k - interval.scale;
        let cells = interval.cells(k);
        let local = DyadicFunction::new(local_res, self.f.values()[cells].to_vec())
            .expect("slice of a valid function");
        let coeffs = Rc::new(crate::dyadic::walsh_transform(&local));
        self.memo
            .borrow_mut()
            .insert(interval, Rc::clone(&coeffs));
        coeffs
    }

    /// `⟨f, w_p⟩ = 2^{-s/2}·ĝ_I(n)` where `ĝ_I` is the mean-normalized local
    /// transform on `I_p`.
    pub fn coefficient(&self, p: &Tile) -> Result<f64, Error> {
        let k = self.f.resolution();
        let s = p.scale();
        if s > k || p.freq_index >= 1u64 << (k - s) {
            return Err(Error::FrequencyTooHigh {
                n: p.freq_index,
                resolution: k,
            });
        }
        let coeffs = self.local_coeffs(p.time);
        Ok(f64::powi(2.0, -(s as i32)).sqrt() * coeffs[p.freq_index as usize])
    }
}

/// `⟨f, w_p⟩` without a shared cache.
pub fn coefficient(f: &DyadicFunction, p: &Tile) -> Result<f64, Error> {
    PacketCache::new(f).coefficient(p)
}

/// All bi-tiles `P` with `I_P ⊆ [0,1]`, `|I_P| ≥ 2^{-K}` and the upper half
/// of `ω_P` containing at least one sequence term.  For each term and scale
/// there is at most one admissible frequency block (`n_j >> s` odd), so the
/// count is `O(N·2^K)`.
pub fn enumerate_bitiles(
    resolution: u8,
    seq: &LacunarySequence,
) -> Result<TileCollection, Error> {
    if seq.max_term() >= 1u64 << resolution {
        return Err(Error::BadSequence(format!(
            "term {} not below 2^{resolution}",
            seq.max_term()
        )));
    }
    let mut bitiles = Vec::new();
    for &n in seq.terms() {
        for s in 0..=resolution {
            if (n >> s) & 1 == 1 {
                let freq_index = n >> (s + 1);
                for m in 0..1u32 << s {
                    bitiles.push(BiTile::new(s, m, freq_index)?);
                }
            }
        }
    }
    Ok(TileCollection::new(bitiles))
}

/// The discretized Carleson operator
/// `Cf(x) = Σ_P ⟨f, w_{P_ℓ}⟩ w_{P_ℓ}(x) 1_{(x,N(x)) ∈ P_u}`.
pub fn carleson_apply(
    f: &DyadicFunction,
    choice: &ChoiceFunction,
    tiles: &TileCollection,
) -> Result<DyadicFunction, Error> {
    let k = f.resolution();
    if choice.resolution() != k {
        return Err(Error::ResolutionMismatch(k, choice.resolution()));
    }
    let cache = PacketCache::new(f);
    let mut out = vec![0.0; f.len()];
    for p in tiles.bitiles() {
        let coef = cache.coefficient(&p.lower())?;
        if coef == 0.0 {
            continue;
        }
        let upper = p.upper().freq();
        let s = p.scale();
        let local_res = k - s;
        let height = f64::powi(2.0, s as i32).sqrt();
        let start = (p.time.index as usize) << local_res;
        let lower_freq = p.lower().freq_index;
        for i_loc in 0..1usize << local_res {
            let i = start + i_loc;
            if upper.contains_freq(choice.value(i)) {
                out[i] += coef * height * walsh_sign(lower_freq, i_loc as u64, local_res) as f64;
            }
        }
    }
    DyadicFunction::new(k, out)
}

/// `B_P(f, g) = Σ_P ⟨f, w_{P_ℓ}⟩ ⟨w_{P_ℓ} 1_{(x,N(x)) ∈ P_u}, g⟩`.
pub fn bilinear_form(
    tiles: &TileCollection,
    f: &DyadicFunction,
    g: &DyadicFunction,
    choice: &ChoiceFunction,
) -> Result<f64, Error> {
    let k = f.resolution();
    if g.resolution() != k || choice.resolution() != k {
        return Err(Error::ResolutionMismatch(k, g.resolution().min(choice.resolution())));
    }
    let cache = PacketCache::new(f);
    let cell = f.cell_measure();
    let mut total = 0.0;
    for p in tiles.bitiles() {
        let coef = cache.coefficient(&p.lower())?;
        if coef == 0.0 {
            continue;
        }
        let upper = p.upper().freq();
        let s = p.scale();
        let local_res = k - s;
        let height = f64::powi(2.0, s as i32).sqrt();
        let start = (p.time.index as usize) << local_res;
        let lower_freq = p.lower().freq_index;
        let mut pairing = 0.0;
        for i_loc in 0..1usize << local_res {
            let i = start + i_loc;
            if upper.contains_freq(choice.value(i)) {
                pairing +=
                    height * walsh_sign(lower_freq, i_loc as u64, local_res) as f64 * g.value(i);
            }
        }
        total += coef * pairing * cell;
    }
    Ok(total)
}

/// Shared state for density evaluations: the ratio
/// `|{x ∈ I' ∩ G : (x, N(x)) ∈ P'}| / |I'|` per candidate bi-tile, memoized.
pub struct DensityContext<'a> {
    g: &'a DyadicFunction,
    choice: &'a ChoiceFunction,
    memo: RefCell<HashMap<BiTile, f64>>,
}

impl<'a> DensityContext<'a> {
    pub fn new(g: &'a DyadicFunction, choice: &'a ChoiceFunction) -> Result<Self, Error> {
        if g.resolution() != choice.resolution() {
            return Err(Error::ResolutionMismatch(
                g.resolution(),
                choice.resolution(),
            ));
        }
        Ok(Self {
            g,
            choice,
            memo: RefCell::new(HashMap::new()),
        })
    }

    /// The displayed ratio for one candidate `P'`; membership `(x, N(x)) ∈ P'`
    /// reads the full bi-tile rectangle.
    pub fn ratio(&self, candidate: &BiTile) -> f64 {
        if let Some(hit) = self.memo.borrow().get(candidate) {
            return *hit;
        }
        let k = self.g.resolution();
        let omega = candidate.freq();
        let cells = candidate.time.cells(k);
        let total = cells.len();
        let mut count = 0usize;
        for i in cells {
            if self.g.value(i) != 0.0 && omega.contains_freq(self.choice.value(i)) {
                count += 1;
            }
        }
        let ratio = count as f64 / total as f64;
        self.memo.borrow_mut().insert(*candidate, ratio);
        ratio
    }

    /// Candidate witnesses above `p`: every bi-tile `P' ≥ p` with
    /// `I' ⊆ [0,1]` (coarser time scales, frequency blocks inside `ω_p`).
    pub fn ancestors(p: &BiTile) -> Vec<BiTile> {
        let mut out = Vec::new();
        let s = p.scale();
        for s2 in 0..=s {
            let time = p.time.ancestor(s2).expect("s2 <= s");
            let shift = s - s2;
            let base = p.freq_index << shift;
            for off in 0..1u64 << shift {
                out.push(BiTile {
                    time,
                    freq_index: base + off,
                });
            }
        }
        out
    }

    /// `dense(p) = sup` of the ratio over `P' ≥ p`.
    pub fn dense_bitile(&self, p: &BiTile) -> f64 {
        Self::ancestors(p)
            .iter()
            .map(|c| self.ratio(c))
            .fold(0.0, f64::max)
    }

    /// `dense(P) = sup_{p ∈ P} dense(p)`.
    pub fn dense_collection(&self, tiles: &TileCollection) -> f64 {
        tiles
            .bitiles()
            .iter()
            .map(|p| self.dense_bitile(p))
            .fold(0.0, f64::max)
    }
}

/// `dense(P)` for a single bi-tile.
pub fn density_bitile(
    p: &BiTile,
    g: &DyadicFunction,
    choice: &ChoiceFunction,
) -> Result<f64, Error> {
    Ok(DensityContext::new(g, choice)?.dense_bitile(p))
}

/// `dense(P)` for a collection.
pub fn density(
    tiles: &TileCollection,
    g: &DyadicFunction,
    choice: &ChoiceFunction,
) -> Result<f64, Error> {
    Ok(DensityContext::new(g, choice)?.dense_collection(tiles))
}

/// Size-eligible sum per candidate top: `Σ ⟨f, w_{P_ℓ}⟩²` over members with
/// `ω_T ⊆ ω_{P_u}` and `I_P ⊆ I_T`.
pub fn eligible_sums(
    tiles: &TileCollection,
    cache: &PacketCache<'_>,
) -> Result<BTreeMap<TreeTop, f64>, Error> {
    let mut sums: BTreeMap<TreeTop, f64> = BTreeMap::new();
    let virtual_tops: Vec<TreeTop> = tiles
        .bitiles()
        .iter()
        .filter(|p| p.scale() == 0)
        .flat_map(|p| {
            [
                TreeTop::virtual_top(p.lower().freq()),
                TreeTop::virtual_top(p.upper().freq()),
            ]
        })
        .collect();
    for p in tiles.bitiles() {
        let coef = cache.coefficient(&p.lower())?;
        let energy = coef * coef;
        if energy == 0.0 {
            continue;
        }
        let s = p.scale();
        let upper = p.upper().freq();
        for s2 in 0..s {
            let time = p.time.ancestor(s2).expect("s2 < s");
            let level = s2 + 1;
            let shift = s - level;
            let base = upper.index << shift;
            for off in 0..1u64 << shift {
                let top = TreeTop {
                    time,
                    omega: FreqInterval {
                        level,
                        index: base + off,
                    },
                };
                *sums.entry(top).or_insert(0.0) += energy;
            }
        }
        for vt in &virtual_tops {
            if vt.eligible(p) {
                *sums.entry(*vt).or_insert(0.0) += energy;
            }
        }
    }
    Ok(sums)
}

/// `size_f(P) = sup_T [ |I_T|^{-1} Σ_{P ∈ T, P_ℓ ∩ top = ∅} ⟨f,w_{P_ℓ}⟩² ]^{1/2}`.
pub fn size(tiles: &TileCollection, f: &DyadicFunction) -> Result<f64, Error> {
    let cache = PacketCache::new(f);
    size_with_cache(tiles, &cache)
}

pub fn size_with_cache(
    tiles: &TileCollection,
    cache: &PacketCache<'_>,
) -> Result<f64, Error> {
    let sums = eligible_sums(tiles, cache)?;
    Ok(sums
        .iter()
        .map(|(top, sum)| (sum / top.top_length()).sqrt())
        .fold(0.0, f64::max))
}

/// Report of the size-vs-maximal-function bound.
#[derive(Debug, Clone)]
pub struct UpperSizeReport {
    pub precondition_ok: bool,
    pub size: f64,
    pub threshold: f64,
    pub measured_c: f64,
    pub holds: bool,
}

/// Checks `size_f(P) ≤ C·A` for collections whose time intervals all meet
/// `{Mf ≤ A}`.  A violated precondition is reported, not ignored.
pub fn upper_size_check(
    tiles: &TileCollection,
    f: &DyadicFunction,
    a: f64,
    c_upper: f64,
) -> Result<UpperSizeReport, Error> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("threshold A must be positive, got {a}")));
    }
    let maximal = crate::dyadic::dyadic_maximal(f);
    let k = f.resolution();
    let precondition_ok = tiles.bitiles().iter().all(|p| {
        p.time
            .cells(k)
            .any(|i| maximal.value(i) <= a)
    });
    let s = size(tiles, f)?;
    let measured_c = s / a;
    Ok(UpperSizeReport {
        precondition_ok,
        size: s,
        threshold: a,
        measured_c,
        holds: precondition_ok && measured_c <= c_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::partial_sum;

    #[test]
    fn wave_packet_examples() {
        // [0,1]×[0,1) is W_0
        let p = Tile::new(0, 0, 0).unwrap();
        let w = wave_packet(&p, 3).unwrap();
        assert!(w.values().iter().all(|&v| v == 1.0));

        // [0,1/2)×[0,2): √2 on [0,1/2)
        let p = Tile::new(1, 0, 0).unwrap();
        let w = wave_packet(&p, 3).unwrap();
        let r2 = 2.0f64.sqrt();
        assert_eq!(w.values(), &[r2, r2, r2, r2, 0.0, 0.0, 0.0, 0.0]);

        // [0,1/2)×[2,4): ±√2 split at 1/4
        let p = Tile::new(1, 0, 1).unwrap();
        let w = wave_packet(&p, 3).unwrap();
        assert_eq!(w.values(), &[r2, r2, -r2, -r2, 0.0, 0.0, 0.0, 0.0]);

        // unit L² norm
        for (s, m, n) in [(0u8, 0u32, 5u64), (1, 1, 2), (2, 3, 1)] {
            let w = wave_packet(&Tile::new(s, m, n).unwrap(), 4).unwrap();
            assert!((w.l2_norm() - 1.0).abs() < 1e-12);
        }

        // unrepresentable tile rejected
        assert!(wave_packet(&Tile::new(2, 0, 4).unwrap(), 4).is_err());
    }

    #[test]
    fn packets_of_disjoint_tiles_are_orthogonal() {
        let k = 4u8;
        let mut tiles = Vec::new();
        for s in 0..=2u8 {
            for m in 0..1u32 << s {
                for n in 0..1u64 << (k - s) {
                    tiles.push(Tile::new(s, m, n).unwrap());
                }
            }
        }
        for a in &tiles {
            let wa = wave_packet(a, k).unwrap();
            for b in &tiles {
                if !a.intersects(b) {
                    let wb = wave_packet(b, k).unwrap();
                    assert!(
                        wa.inner(&wb).unwrap().abs() < 1e-12,
                        "⟨w_{a}, w_{b}⟩ ≠ 0"
                    );
                }
            }
        }
    }

    #[test]
    fn restriction_property() {
        // For p < q (tiles), w_q restricted to I_p is a scalar multiple of w_p
        // with |scalar| = (|I_p|/|I_q|)^{1/2}.
        let k = 5u8;
        let q = Tile::new(1, 0, 3).unwrap();
        let wq = wave_packet(&q, k).unwrap();
        for s in 2..=3u8 {
            for m in 0..1u32 << (s - 1) {
                // tiles over subintervals of I_q whose frequency contains ω_q
                let n = q.freq_index >> (s - q.scale()); // block containing... need ω_q ⊆ ω_p: p coarser in freq
                let p = Tile::new(s, m, n.max(0)).unwrap();
                if !p.leq(&q) {
                    continue;
                }
                let wp = wave_packet(&p, k).unwrap();
                let scalar_expected = (p.time.length() / q.time.length()).sqrt();
                // find the actual ratio on the support of p
                let cells = p.time.cells(k);
                let mut ratio: Option<f64> = None;
                for i in cells {
                    let a = wq.value(i);
                    let b = wp.value(i);
                    assert!(b != 0.0);
                    let r = a / b;
                    if let Some(r0) = ratio {
                        assert!((r - r0).abs() < 1e-12, "not a scalar multiple");
                    } else {
                        ratio = Some(r);
                    }
                }
                assert!((ratio.unwrap().abs() - scalar_expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let k = 3u8;
        let p = Tile::new(1, 0, 1).unwrap();
        let w = wave_packet(&p, k).unwrap();
        assert!((coefficient(&w, &p).unwrap() - 1.0).abs() < 1e-12);

        let q = Tile::new(1, 1, 1).unwrap();
        assert!(coefficient(&w, &q).unwrap().abs() < 1e-12);

        let f = DyadicFunction::walsh(3, 5).unwrap();
        let top = Tile::new(0, 0, 5).unwrap();
        assert!((coefficient(&f, &top).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bessel_for_disjoint_tiles() {
        let mut rng = crate::sampling::seeded_rng(13);
        let k = 6u8;
        // a disjoint family: all tiles of one scale partitioning a strip
        for s in 0..=3u8 {
            let f = crate::sampling::random_function(&mut rng, k);
            let cache = PacketCache::new(&f);
            let mut sum = 0.0;
            for m in 0..1u32 << s {
                for n in 0..1u64 << (k - s) {
                    let c = cache.coefficient(&Tile::new(s, m, n).unwrap()).unwrap();
                    sum += c * c;
                }
            }
            // full orthonormal basis at each scale: Parseval, not just Bessel
            assert!((sum - f.l2_norm_sq()).abs() < 1e-10);
        }
    }

    #[test]
    fn enumerate_examples() {
        let seq = LacunarySequence::new(vec![1]).unwrap();
        for k in 1..=6u8 {
            let tiles = enumerate_bitiles(k, &seq).unwrap();
            assert_eq!(tiles.len(), 1, "K={k}");
            assert_eq!(tiles.bitiles()[0], BiTile::new(0, 0, 0).unwrap());
        }

        // fixed term list: the count does not depend on K once representable
        let seq = LacunarySequence::powers_of_two(8).unwrap();
        let c8 = enumerate_bitiles(8, &seq).unwrap().len();
        let c9_same = enumerate_bitiles(9, &seq).unwrap().len();
        assert_eq!(c8, c9_same);
        // the default K-scaled sequence doubles the count with K (≈ N·2^K)
        let seq9 = LacunarySequence::powers_of_two(9).unwrap();
        let c9 = enumerate_bitiles(9, &seq9).unwrap().len();
        let growth = c9 as f64 / c8 as f64;
        assert!(growth > 1.8 && growth < 2.2, "growth {growth}");
    }

    #[test]
    fn carleson_simple_cases() {
        let seq = LacunarySequence::new(vec![1]).unwrap();
        let k = 1u8;
        let tiles = enumerate_bitiles(k, &seq).unwrap();
        let choice = ChoiceFunction::constant(k, 1, &seq).unwrap();

        let f = DyadicFunction::walsh(k, 0).unwrap();
        let out = carleson_apply(&f, &choice, &tiles).unwrap();
        assert!(out.values().iter().all(|&v| (v - 1.0).abs() < 1e-12));

        let f = DyadicFunction::walsh(k, 1).unwrap();
        let out = carleson_apply(&f, &choice, &tiles).unwrap();
        assert!(out.sup_norm() < 1e-12);
    }

    #[test]
    fn master_identity_random() {
        let k = 8u8;
        let seq = LacunarySequence::powers_of_two(k).unwrap();
        let tiles = enumerate_bitiles(k, &seq).unwrap();
        let mut rng = crate::sampling::seeded_rng(17);
        for _ in 0..20 {
            let f = crate::sampling::random_function(&mut rng, k);
            let choice = crate::sampling::random_choice(&mut rng, k, &seq);
            let out = carleson_apply(&f, &choice, &tiles).unwrap();
            // oracle: direct truncated coefficient sums
            for i in 0..f.len() {
                let n = choice.value(i);
                let oracle = partial_sum(&f, n).unwrap().value(i);
                assert!(
                    (out.value(i) - oracle).abs() < 1e-9,
                    "cell {i}: {} vs {oracle}",
                    out.value(i)
                );
            }
        }
    }

    #[test]
    fn linearization_identity() {
        let k = 7u8;
        let seq = LacunarySequence::powers_of_two(k).unwrap();
        let tiles = enumerate_bitiles(k, &seq).unwrap();
        let mut rng = crate::sampling::seeded_rng(19);
        for _ in 0..5 {
            let f = crate::sampling::random_function(&mut rng, k);
            let (maximal, argmax) = crate::dyadic::lacunary_maximal(&f, &seq).unwrap();
            let out = carleson_apply(&f, &argmax, &tiles).unwrap();
            for i in 0..f.len() {
                assert!((maximal.value(i) - out.value(i).abs()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn bilinear_matches_pairing() {
        let k = 6u8;
        let seq = LacunarySequence::powers_of_two(k).unwrap();
        let tiles = enumerate_bitiles(k, &seq).unwrap();
        let mut rng = crate::sampling::seeded_rng(23);
        for _ in 0..5 {
            let f = crate::sampling::random_function(&mut rng, k);
            let g = crate::sampling::random_function(&mut rng, k);
            let choice = crate::sampling::random_choice(&mut rng, k, &seq);
            let b = bilinear_form(&tiles, &f, &g, &choice).unwrap();
            let cf = carleson_apply(&f, &choice, &tiles).unwrap();
            assert!((b - cf.inner(&g).unwrap()).abs() < 1e-10);
        }
        // additivity over a disjoint split
        let f = crate::sampling::random_function(&mut rng, k);
        let g = crate::sampling::random_function(&mut rng, k);
        let choice = crate::sampling::random_choice(&mut rng, k, &seq);
        let (p1, p2) = tiles.partition(|p| p.scale() % 2 == 0);
        let whole = bilinear_form(&tiles, &f, &g, &choice).unwrap();
        let b1 = bilinear_form(&p1, &f, &g, &choice).unwrap();
        let b2 = bilinear_form(&p2, &f, &g, &choice).unwrap();
        assert!((whole - b1 - b2).abs() < 1e-10);
        // zero g
        let b0 = bilinear_form(&tiles, &f, &DyadicFunction::zero(k), &choice).unwrap();
        assert_eq!(b0, 0.0);
    }

    #[test]
    fn density_examples() {
        let seq = LacunarySequence::new(vec![1]).unwrap();
        let k = 3u8;
        let g = DyadicFunction::constant(k, 1.0);
        let choice = ChoiceFunction::constant(k, 1, &seq).unwrap();
        let p = BiTile::new(0, 0, 0).unwrap();
        assert!((density_bitile(&p, &g, &choice).unwrap() - 1.0).abs() < 1e-15);

        let empty = DyadicFunction::zero(k);
        assert_eq!(density_bitile(&p, &empty, &choice).unwrap(), 0.0);

        // monotone in G
        let mut rng = crate::sampling::seeded_rng(29);
        let seq2 = LacunarySequence::powers_of_two(5).unwrap();
        for _ in 0..10 {
            let small = crate::sampling::random_indicator(&mut rng, 5, 0.3);
            let big = DyadicFunction::new(
                5,
                small
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if v != 0.0 || i % 3 == 0 { 1.0 } else { 0.0 })
                    .collect(),
            )
            .unwrap();
            let choice = crate::sampling::random_choice(&mut rng, 5, &seq2);
            let p = BiTile::new(2, 1, 1).unwrap();
            assert!(
                density_bitile(&p, &small, &choice).unwrap()
                    <= density_bitile(&p, &big, &choice).unwrap() + 1e-15
            );
        }
    }

    #[test]
    fn size_single_bitile_example() {
        // P = {[0,1/2)×[0,4)}, f = its lower wave packet → size 1 via the top
        // [0,1)×[2,4).
        let k = 4u8;
        let p = BiTile::new(1, 0, 0).unwrap();
        let f = wave_packet(&p.lower(), k).unwrap();
        let tiles = TileCollection::new(vec![p]);
        let s = size(&tiles, &f).unwrap();
        assert!((s - 1.0).abs() < 1e-12);

        assert_eq!(size(&tiles, &DyadicFunction::zero(k)).unwrap(), 0.0);
    }

    #[test]
    fn size_monotone_under_inclusion() {
        let k = 6u8;
        let seq = LacunarySequence::powers_of_two(k).unwrap();
        let all = enumerate_bitiles(k, &seq).unwrap();
        let mut rng = crate::sampling::seeded_rng(31);
        for _ in 0..5 {
            let f = crate::sampling::random_function(&mut rng, k);
            let sub = crate::sampling::random_subcollection(&mut rng, &all, 0.4);
            assert!(size(&sub, &f).unwrap() <= size(&all, &f).unwrap() + 1e-12);
        }
    }

    #[test]
    fn virtual_top_gives_scale0_size() {
        let k = 3u8;
        let p = BiTile::new(0, 0, 2).unwrap(); // [0,1]×[4,6)
        let f = wave_packet(&p.lower(), k).unwrap(); // W_4
        let tiles = TileCollection::new(vec![p]);
        let s = size(&tiles, &f).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "virtual top must witness size, got {s}");
    }

    #[test]
    fn upper_size_bound_family() {
        // f = 2^m·1_[0,2^-m), collections meeting [1/2,1), A = 2
        let k = 8u8;
        for m in 2..=8u32 {
            let f = DyadicFunction::indicator_range(k, 0, 1 << (k - m as u8))
                .unwrap()
                .scale(f64::powi(2.0, m as i32));
            // bi-tiles whose time interval meets [1/2,1)
            let mut members = Vec::new();
            for s in 0..=3u8 {
                for mm in 0..1u32 << s {
                    let time = DyadicInterval::new(s, mm).unwrap();
                    if time.cells(k).end > (1 << (k - 1)) {
                        for n in 0..4u64 {
                            members.push(BiTile { time, freq_index: n });
                        }
                    }
                }
            }
            let tiles = TileCollection::new(members);
            let report = upper_size_check(&tiles, &f, 2.0, 8.0).unwrap();
            assert!(report.precondition_ok, "m={m}");
            assert!(report.holds, "m={m}: measured {}", report.measured_c);
        }

        // constant function: size ≤ ‖f‖_∞ = A
        let f = DyadicFunction::constant(6, 2.0);
        let seq = LacunarySequence::powers_of_two(6).unwrap();
        let tiles = enumerate_bitiles(6, &seq).unwrap();
        let report = upper_size_check(&tiles, &f, 2.0, 8.0).unwrap();
        assert!(report.precondition_ok);
        assert!(report.measured_c <= 1.0 + 1e-12);

        // zero function
        let report = upper_size_check(&tiles, &DyadicFunction::zero(6), 2.0, 8.0).unwrap();
        assert_eq!(report.size, 0.0);
        assert!(report.holds);
    }
}
