//! Constructive decomposition algorithms with machine-checkable certificates:
//! the density and size splits, the tree bound, the full two-functional
//! decomposition, and the two-regime effective bound.
//!
//! Selection orders are deterministic.  Density witnesses are chosen from
//! largest time interval downward; size trees take the candidate top with the
//! lowest frequency block first, which makes the selected size-eligible wave
//! packets pairwise disjoint and therefore turns the Bessel inequality into a
//! runtime certificate for the energy count.

use serde::{Deserialize, Serialize};

use crate::config::Constants;
use crate::dyadic::DyadicFunction;
use crate::error::Error;
use crate::phase::{
    bilinear_form, carleson_apply, eligible_sums, size_with_cache, DensityContext, PacketCache,
};
use crate::tiles::{
    bitile_leq, BiTile, ChoiceFunction, EnergyCertificate, TileCollection, Tree, TreeTop,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitKind {
    Density,
    Size,
}

/// Result of a density or size split, carrying everything needed to re-verify
/// it from scratch.
#[derive(Debug, Clone)]
pub struct SplitCertificate {
    pub kind: SplitKind,
    /// The collection that was split.
    pub input: TileCollection,
    pub small: TileCollection,
    pub big: TileCollection,
    /// Trees covering `big`, in selection order; they partition `big`.
    pub trees: Vec<Tree>,
    pub tree_top_length_sum: f64,
    /// δ for a density split, σ for a size split.
    pub threshold: f64,
    /// `C·δ^{-1}|G|` resp. `C·σ^{-2}‖f‖₂²`.
    pub claimed_bound: f64,
    /// `Σ|I_T| / (δ^{-1}|G|)` resp. `Σ|I_T| / (σ^{-2}‖f‖₂²)`.
    pub measured_ratio: f64,
    /// Never silently accepted: a failed ratio assertion is reported here.
    pub holds: bool,
    /// `|G|` for density splits, `‖f‖₂²` for size splits.
    pub mass: f64,
    /// Size splits only: the Bessel check over the selected eligible packets.
    pub bessel: Option<BesselCheck>,
}

#[derive(Debug, Clone)]
pub struct BesselCheck {
    pub pairwise_disjoint: bool,
    pub packet_energy: f64,
    pub l2_norm_sq: f64,
    pub holds: bool,
}

/// Outcome of re-verifying a certificate from its raw inputs.
#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyOutcome {
    pub partition_ok: bool,
    pub coverage_ok: bool,
    pub trees_inside_big: bool,
    pub sum_ok: bool,
    pub small_ok: bool,
    pub ratio_ok: bool,
    pub bessel_ok: bool,
    pub diffs: Vec<String>,
}

impl VerifyOutcome {
    pub fn ok(&self) -> bool {
        self.partition_ok
            && self.coverage_ok
            && self.trees_inside_big
            && self.sum_ok
            && self.small_ok
            && self.ratio_ok
            && self.bessel_ok
    }
}

impl SplitCertificate {
    /// Recompute every claimed fact.  `g`/`choice` drive density splits,
    /// `f` size splits.
    pub fn verify(
        &self,
        f: Option<&DyadicFunction>,
        g: Option<&DyadicFunction>,
        choice: Option<&ChoiceFunction>,
    ) -> Result<VerifyOutcome, Error> {
        let mut out = VerifyOutcome {
            bessel_ok: true,
            ..Default::default()
        };

        // partition: small ⊔ big = input
        let rebuilt = self.small.union(&self.big);
        out.partition_ok = rebuilt.bitiles() == self.input.bitiles()
            && self.small.len() + self.big.len() == self.input.len();
        if !out.partition_ok {
            out.diffs.push("small/big do not partition the input".into());
        }

        // coverage: every big member in some tree, members under their tops
        out.coverage_ok = self.big.bitiles().iter().all(|p| {
            self.trees
                .iter()
                .any(|t| t.members.binary_search(p).is_ok())
        }) && self
            .trees
            .iter()
            .all(|t| t.members.iter().all(|m| t.top.admits(m)));
        if !out.coverage_ok {
            out.diffs.push("certificate trees do not cover big".into());
        }
        out.trees_inside_big = self
            .trees
            .iter()
            .all(|t| t.members.iter().all(|m| self.big.contains(m)));
        if !out.trees_inside_big {
            out.diffs.push("a tree member is outside big".into());
        }

        // Σ|I_T|
        let sum: f64 = self.trees.iter().map(Tree::top_length).sum();
        out.sum_ok = (sum - self.tree_top_length_sum).abs() <= 1e-12 * (1.0 + sum.abs());
        if !out.sum_ok {
            out.diffs.push(format!(
                "tree_top_length_sum: claimed {} recomputed {sum}",
                self.tree_top_length_sum
            ));
        }

        // small functional halved, ratio arithmetic
        match self.kind {
            SplitKind::Density => {
                let (g, choice) = match (g, choice) {
                    (Some(g), Some(c)) => (g, c),
                    _ => {
                        return Err(Error::Precondition(
                            "density certificate needs G and N to verify".into(),
                        ))
                    }
                };
                let ctx = DensityContext::new(g, choice)?;
                let small_density = ctx.dense_collection(&self.small);
                out.small_ok = small_density <= self.threshold / 2.0 + 1e-12;
                if !out.small_ok {
                    out.diffs.push(format!(
                        "small density {small_density} exceeds {}",
                        self.threshold / 2.0
                    ));
                }
                let denom = self.mass / self.threshold;
                let ratio = if denom > 0.0 { sum / denom } else { 0.0 };
                out.ratio_ok = (ratio - self.measured_ratio).abs() <= 1e-9 * (1.0 + ratio.abs());
                if !out.ratio_ok {
                    out.diffs.push(format!(
                        "ratio: claimed {} recomputed {ratio}",
                        self.measured_ratio
                    ));
                }
            }
            SplitKind::Size => {
                let f = f.ok_or_else(|| {
                    Error::Precondition("size certificate needs f to verify".into())
                })?;
                let cache = PacketCache::new(f);
                let small_size = size_with_cache(&self.small, &cache)?;
                out.small_ok = small_size <= self.threshold / 2.0 + 1e-12;
                if !out.small_ok {
                    out.diffs.push(format!(
                        "small size {small_size} exceeds {}",
                        self.threshold / 2.0
                    ));
                }
                let denom = self.mass / (self.threshold * self.threshold);
                let ratio = if denom > 0.0 { sum / denom } else { 0.0 };
                out.ratio_ok = (ratio - self.measured_ratio).abs() <= 1e-9 * (1.0 + ratio.abs());
                if !out.ratio_ok {
                    out.diffs.push(format!(
                        "ratio: claimed {} recomputed {ratio}",
                        self.measured_ratio
                    ));
                }
                if let Some(b) = &self.bessel {
                    let redo = bessel_check(&self.trees, &cache)?;
                    out.bessel_ok = redo.pairwise_disjoint == b.pairwise_disjoint
                        && (redo.packet_energy - b.packet_energy).abs()
                            <= 1e-9 * (1.0 + b.packet_energy)
                        && redo.holds;
                    if !out.bessel_ok {
                        out.diffs.push(format!(
                            "bessel: claimed energy {} recomputed {}",
                            b.packet_energy, redo.packet_energy
                        ));
                    }
                }
            }
        }
        Ok(out)
    }
}

fn bessel_check(trees: &[Tree], cache: &PacketCache<'_>) -> Result<BesselCheck, Error> {
    let mut packets: Vec<crate::tiles::Tile> = Vec::new();
    for t in trees {
        for m in t.eligible_members() {
            packets.push(m.lower());
        }
    }
    let mut pairwise_disjoint = true;
    'outer: for i in 0..packets.len() {
        for j in i + 1..packets.len() {
            if packets[i].intersects(&packets[j]) {
                pairwise_disjoint = false;
                break 'outer;
            }
        }
    }
    let mut energy = 0.0;
    for p in &packets {
        let c = cache.coefficient(p)?;
        energy += c * c;
    }
    let l2 = cache.function().l2_norm_sq();
    Ok(BesselCheck {
        pairwise_disjoint,
        packet_energy: energy,
        l2_norm_sq: l2,
        holds: pairwise_disjoint && energy <= l2 + 1e-10 * (1.0 + l2),
    })
}

/// Density split: `small` has density ≤ δ/2; `big` is covered by trees whose
/// tops are maximal witness bi-tiles, selected largest `|I'|` first.
///
/// Distinct selected tops are incomparable, hence phase-plane disjoint, so
/// their witness sets are disjoint subsets of `G`: `Σ|I_T| < 2·δ^{-1}|G|`.
pub fn density_split(
    tiles: &TileCollection,
    g: &DyadicFunction,
    choice: &ChoiceFunction,
    delta: f64,
    consts: &Constants,
) -> Result<SplitCertificate, Error> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!(
            "density split needs δ > 0, got {delta}"
        )));
    }
    let ctx = DensityContext::new(g, choice)?;
    let half = delta / 2.0;

    // all candidate witnesses above any member
    let mut witnesses: Vec<BiTile> = Vec::new();
    for p in tiles.bitiles() {
        for c in DensityContext::ancestors(p) {
            if ctx.ratio(&c) > half {
                witnesses.push(c);
            }
        }
    }
    witnesses.sort();
    witnesses.dedup();
    // largest |I'| first, then deterministic tie-break
    witnesses.sort_by_key(|w| (w.scale(), w.time.index, w.freq_index));

    let mut tops: Vec<BiTile> = Vec::new();
    for w in &witnesses {
        if !tops.iter().any(|t| bitile_leq(w, t)) {
            tops.push(*w);
        }
    }

    let (big, small) = tiles.partition(|p| tops.iter().any(|t| bitile_leq(p, t)));

    // assign each big member to its first containing top
    let mut tree_members: Vec<Vec<BiTile>> = vec![Vec::new(); tops.len()];
    for p in big.bitiles() {
        let slot = tops
            .iter()
            .position(|t| bitile_leq(p, t))
            .expect("big members lie under some top");
        tree_members[slot].push(*p);
    }
    let trees: Vec<Tree> = tops
        .iter()
        .zip(tree_members)
        .filter(|(_, ms)| !ms.is_empty())
        .map(|(t, ms)| Tree::new(TreeTop::from_bitile(t), ms))
        .collect::<Result<_, _>>()?;

    let sum: f64 = trees.iter().map(Tree::top_length).sum();
    let g_measure = g.measure();
    let denom = g_measure / delta;
    let measured_ratio = if denom > 0.0 { sum / denom } else { 0.0 };
    Ok(SplitCertificate {
        kind: SplitKind::Density,
        input: tiles.clone(),
        small,
        big,
        trees,
        tree_top_length_sum: sum,
        threshold: delta,
        claimed_bound: consts.c_dens * denom,
        measured_ratio,
        holds: measured_ratio <= consts.c_dens,
        mass: g_measure,
        bessel: None,
    })
}

/// Size split: iteratively select, among candidate tops whose size-eligible
/// sum exceeds `(σ/2)²|I_T|`, the one with the lowest frequency block
/// (tie-break: larger `|I_T|`, then position), and remove the full tree under
/// it.  The leftover has size ≤ σ/2 and the removed trees certify
/// `Σ|I_T| < 4·σ^{-2}‖f‖₂²` through the Bessel check.
pub fn size_split(
    tiles: &TileCollection,
    f: &DyadicFunction,
    sigma: f64,
    consts: &Constants,
) -> Result<SplitCertificate, Error> {
    if !(sigma > 0.0) {
        return Err(Error::Precondition(format!(
            "size split needs σ > 0, got {sigma}"
        )));
    }
    let cache = PacketCache::new(f);
    let threshold_factor = (sigma / 2.0) * (sigma / 2.0);

    let mut remaining = tiles.clone();
    let mut trees: Vec<Tree> = Vec::new();
    let mut guard = tiles.len();
    loop {
        let sums = eligible_sums(&remaining, &cache)?;
        let chosen = sums
            .iter()
            .filter(|(top, sum)| **sum > threshold_factor * top.top_length())
            .min_by(|(a, _), (b, _)| {
                (a.omega.lower_edge(), a.time.scale, a.time.index, a.omega.level)
                    .cmp(&(b.omega.lower_edge(), b.time.scale, b.time.index, b.omega.level))
            })
            .map(|(top, _)| *top);
        let Some(top) = chosen else { break };
        let (tree_part, rest) = remaining.partition(|p| top.admits(p));
        debug_assert!(!tree_part.is_empty(), "selected top admits no members");
        trees.push(Tree::new(top, tree_part.bitiles().to_vec())?);
        remaining = rest;
        if guard == 0 {
            return Err(Error::Precondition(
                "size split failed to terminate".into(),
            ));
        }
        guard -= 1;
    }

    let small = remaining;
    let big = TileCollection::new(
        trees
            .iter()
            .flat_map(|t| t.members.iter().copied())
            .collect(),
    );
    let sum: f64 = trees.iter().map(Tree::top_length).sum();
    let l2_sq = f.l2_norm_sq();
    let denom = l2_sq / (sigma * sigma);
    let measured_ratio = if denom > 0.0 { sum / denom } else { 0.0 };
    let bessel = bessel_check(&trees, &cache)?;
    let holds = measured_ratio <= consts.c_size && bessel.holds;
    Ok(SplitCertificate {
        kind: SplitKind::Size,
        input: tiles.clone(),
        small,
        big,
        trees,
        tree_top_length_sum: sum,
        threshold: sigma,
        claimed_bound: consts.c_size * denom,
        measured_ratio,
        holds,
        mass: l2_sq,
        bessel: Some(bessel),
    })
}

/// Report of the single-tree bound `|B_T(f,g)| ≤ C·dense(T)·size_f(T)·|I_T|`.
#[derive(Debug, Clone)]
pub struct TreeBoundReport {
    pub form: f64,
    pub dense: f64,
    pub size: f64,
    pub top_length: f64,
    pub bound: f64,
    pub ratio: f64,
    pub holds: bool,
}

pub fn tree_bound_check(
    tree: &Tree,
    f: &DyadicFunction,
    g: &DyadicFunction,
    big_g: &DyadicFunction,
    choice: &ChoiceFunction,
    consts: &Constants,
) -> Result<TreeBoundReport, Error> {
    // domination |g| ≤ 1_G
    for (i, v) in g.values().iter().enumerate() {
        let cap = if big_g.value(i) != 0.0 { 1.0 } else { 0.0 };
        if v.abs() > cap + 1e-12 {
            return Err(Error::Precondition(format!(
                "g is not dominated by 1_G at cell {i}"
            )));
        }
    }
    let collection = TileCollection::new(tree.members.clone());
    let form = bilinear_form(&collection, f, g, choice)?.abs();
    let dense = crate::phase::density(&collection, big_g, choice)?;
    let size = crate::phase::size(&collection, f)?;
    let top_length = tree.top_length();
    let bound = dense * size * top_length;
    let ratio = if bound > 0.0 {
        form / bound
    } else if form <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(TreeBoundReport {
        form,
        dense,
        size,
        top_length,
        bound,
        ratio,
        holds: ratio <= consts.c_tree,
    })
}

/// One level of the proof-of-Carleson decomposition.
#[derive(Debug, Clone)]
pub struct DecompositionLevel {
    pub level: i32,
    pub collection: TileCollection,
    pub density_cert: Option<SplitCertificate>,
    pub size_cert: Option<SplitCertificate>,
    /// Recomputed facts on the level collection.
    pub dense_value: f64,
    pub size_value: f64,
    pub dense_bound: f64,
    pub size_bound: f64,
    pub energy_sum: f64,
    pub energy_bound: f64,
    /// `|B_{P_n}(f_norm, g)|` with the adversarial `g = sign(Cf)·1_G`.
    pub form: f64,
    /// `min{2^{n/2}, 2^{-n/2}}` — the idealized summable bound.
    pub ideal_bound: f64,
}

/// Decomposition of a collection into levels `P_n` with
/// `dense ≤ min(1, 2^{-n})`, `size ≤ 2^{-n/2}`, `energy ≲ 2^n`.
#[derive(Debug, Clone)]
pub struct LevelDecomposition {
    pub levels: Vec<DecompositionLevel>,
    /// Members left after the last level; their density is exactly 0, so they
    /// contribute nothing to the form against dominated g.
    pub residual: TileCollection,
    pub residual_form: f64,
    /// `‖f‖₂` by which the input was normalized.
    pub f_scale: f64,
    pub g_measure: f64,
    pub total_form: f64,
    /// `Σ_n C_tree·dense_bound·size_bound·Σ|I_T|` — the certified majorant.
    pub total_bound: f64,
}

impl LevelDecomposition {
    /// Levels are pairwise disjoint and together with the residual exhaust
    /// the input.
    pub fn partition_ok(&self, input: &TileCollection) -> bool {
        let mut all: Vec<BiTile> = self
            .levels
            .iter()
            .flat_map(|l| l.collection.bitiles().iter().copied())
            .chain(self.residual.bitiles().iter().copied())
            .collect();
        let total = all.len();
        all.sort();
        all.dedup();
        total == all.len() && all == input.bitiles()
    }
}

/// Alternating density/size splits.  The input is normalized internally to
/// `‖f‖₂ = 1`; `g = sign(Cf)·1_G` is the adversarial pairing function.
pub fn carleson_decomposition(
    tiles: &TileCollection,
    f: &DyadicFunction,
    big_g: &DyadicFunction,
    choice: &ChoiceFunction,
    consts: &Constants,
) -> Result<LevelDecomposition, Error> {
    let k = f.resolution();
    let f_scale = f.l2_norm();
    let f_norm = if f_scale > 0.0 {
        f.scale(1.0 / f_scale)
    } else {
        f.clone()
    };
    let g_measure = big_g.measure();

    // adversarial pairing function against the P-restricted operator output
    let restricted = carleson_apply(&f_norm, choice, tiles)?;
    let g = DyadicFunction::new(
        k,
        restricted
            .values()
            .iter()
            .zip(big_g.values())
            .map(|(c, ind)| if *ind != 0.0 { c.signum() } else { 0.0 })
            .collect(),
    )?;

    let ctx = DensityContext::new(big_g, choice)?;
    let cache = PacketCache::new(&f_norm);

    let delta0 = ctx.dense_collection(tiles);
    let sigma0 = size_with_cache(tiles, &cache)?;
    let n_max = 2 * k as i32 + 8;
    let mut n_start_candidates: Vec<i32> = Vec::new();
    if delta0 > 0.0 {
        n_start_candidates.push((-delta0.log2()).floor() as i32);
    }
    if sigma0 > 0.0 {
        n_start_candidates.push((-2.0 * sigma0.log2()).floor() as i32);
    }
    let n_start = n_start_candidates
        .into_iter()
        .min()
        .unwrap_or(n_max)
        .clamp(-n_max, n_max)
        .min(0);

    let mut current = tiles.clone();
    let mut levels = Vec::new();
    let mut total_bound = 0.0;
    for n in n_start..=n_max {
        if current.is_empty() {
            break;
        }
        let dense_bound = f64::powi(2.0, -n).min(1.0);
        let size_bound = f64::powf(2.0, -(n as f64) / 2.0);
        let next_dense = f64::powi(2.0, -(n + 1));
        let next_size = f64::powf(2.0, -((n + 1) as f64) / 2.0);

        let delta = ctx.dense_collection(&current);
        let density_cert = if delta > next_dense {
            let cert = density_split(&current, big_g, choice, delta, consts)?;
            current = cert.small.clone();
            Some(cert)
        } else {
            None
        };
        let sigma = size_with_cache(&current, &cache)?;
        let size_cert = if sigma > next_size {
            let cert = size_split(&current, &f_norm, sigma, consts)?;
            current = cert.small.clone();
            Some(cert)
        } else {
            None
        };

        let mut members = Vec::new();
        if let Some(c) = &density_cert {
            members.extend_from_slice(c.big.bitiles());
        }
        if let Some(c) = &size_cert {
            members.extend_from_slice(c.big.bitiles());
        }
        if members.is_empty() {
            continue;
        }
        let collection = TileCollection::new(members);
        let energy_sum = density_cert
            .as_ref()
            .map(|c| c.tree_top_length_sum)
            .unwrap_or(0.0)
            + size_cert
                .as_ref()
                .map(|c| c.tree_top_length_sum)
                .unwrap_or(0.0);
        let energy_bound =
            f64::powi(2.0, n + 1) * (consts.c_dens * g_measure + consts.c_size);
        let form = bilinear_form(&collection, &f_norm, &g, choice)?.abs();
        let dense_value = ctx.dense_collection(&collection);
        let size_value = size_with_cache(&collection, &cache)?;
        total_bound += consts.c_tree * dense_bound * size_bound * energy_sum;
        levels.push(DecompositionLevel {
            level: n,
            collection,
            density_cert,
            size_cert,
            dense_value,
            size_value,
            dense_bound,
            size_bound,
            energy_sum,
            energy_bound,
            form,
            ideal_bound: f64::powf(2.0, (n as f64) / 2.0)
                .min(f64::powf(2.0, -(n as f64) / 2.0)),
        });
    }

    let residual_form = bilinear_form(&current, &f_norm, &g, choice)?.abs();
    let total_form = bilinear_form(tiles, &f_norm, &g, choice)?.abs();
    Ok(LevelDecomposition {
        levels,
        residual: current,
        residual_form,
        f_scale,
        g_measure,
        total_form,
        total_bound,
    })
}

/// Report of the two-regime bound
/// `|B_P(f,g)| ≲ min{size_f(P)·|G|, dense(P)^{1/2}·√|G|·‖f‖₂}`.
#[derive(Debug, Clone)]
pub struct EffectiveBoundReport {
    pub n0: i32,
    pub fallback_first_branch: bool,
    pub assumption_sum: f64,
    pub assumption_bound: f64,
    pub assumption_ok: bool,
    pub levels: Vec<(i32, f64, f64)>,
    /// `Σ_{n ≤ n₀} δ·2^{n/2}·‖f‖₂²`.
    pub geometric_sum: f64,
    pub form: f64,
    pub bound_size_branch: f64,
    pub bound_density_branch: f64,
    pub min_bound: f64,
    pub ratio: f64,
    pub holds: bool,
}

/// Partition into trees under the maximal members — the fallback energy
/// certificate when none is supplied.
pub fn maximal_tree_cover(tiles: &TileCollection) -> Result<Vec<Tree>, Error> {
    let mut maximal: Vec<BiTile> = Vec::new();
    for p in tiles.bitiles() {
        if !tiles
            .bitiles()
            .iter()
            .any(|q| q != p && bitile_leq(p, q) && !bitile_leq(q, p))
        {
            maximal.push(*p);
        }
    }
    maximal.sort_by_key(|w| (w.scale(), w.time.index, w.freq_index));
    let mut kept: Vec<BiTile> = Vec::new();
    for m in maximal {
        if !kept.iter().any(|t| bitile_leq(&m, t)) {
            kept.push(m);
        }
    }
    let mut members: Vec<Vec<BiTile>> = vec![Vec::new(); kept.len()];
    for p in tiles.bitiles() {
        let slot = kept
            .iter()
            .position(|t| bitile_leq(p, t))
            .ok_or_else(|| Error::Precondition(format!("{p} under no maximal element")))?;
        members[slot].push(*p);
    }
    kept.iter()
        .zip(members)
        .map(|(t, ms)| Tree::new(TreeTop::from_bitile(t), ms))
        .collect()
}

/// The two-regime bound: when the size route is more efficient, levels
/// `P_n`, `n ≤ n₀ = ⌊−log₂(δ‖f‖₂²/|G|)⌋`, are produced by the size split
/// alone and the geometric series `Σ δ·2^{n/2}‖f‖₂²` is evaluated.
pub fn effective_bound(
    tiles: &TileCollection,
    f: &DyadicFunction,
    big_g: &DyadicFunction,
    choice: &ChoiceFunction,
    delta: f64,
    certificate: Option<&EnergyCertificate>,
    consts: &Constants,
) -> Result<EffectiveBoundReport, Error> {
    if !(delta > 0.0) {
        return Err(Error::Precondition(format!(
            "effective bound needs δ > 0, got {delta}"
        )));
    }
    let k = f.resolution();
    let fsq = f.l2_norm_sq();
    let g_measure = big_g.measure();

    let assumption_sum = match certificate {
        Some(c) => {
            c.verify(tiles)?;
            c.top_length_sum
        }
        None => maximal_tree_cover(tiles)?
            .iter()
            .map(Tree::top_length)
            .sum(),
    };
    let assumption_bound = consts.c_dens * g_measure / delta;
    let assumption_ok = assumption_sum <= assumption_bound + 1e-12;

    // adversarial pairing
    let restricted = carleson_apply(f, choice, tiles)?;
    let g = DyadicFunction::new(
        k,
        restricted
            .values()
            .iter()
            .zip(big_g.values())
            .map(|(c, ind)| if *ind != 0.0 { c.signum() } else { 0.0 })
            .collect(),
    )?;
    let form = bilinear_form(tiles, f, &g, choice)?.abs();

    let cache = PacketCache::new(f);
    let sigma_all = size_with_cache(tiles, &cache)?;
    let bound_size_branch = sigma_all * g_measure;
    let bound_density_branch = delta.sqrt() * g_measure.sqrt() * fsq.sqrt();

    let x = if g_measure > 0.0 {
        delta * fsq / g_measure
    } else {
        f64::INFINITY
    };
    let fallback_first_branch = !(x < 1.0) || fsq == 0.0;
    let (n0, levels, geometric_sum) = if fallback_first_branch {
        (0, Vec::new(), 0.0)
    } else {
        let n0 = (-x.log2()).floor() as i32;
        let mut current = tiles.clone();
        let mut levels: Vec<(i32, f64, f64)> = Vec::new();
        let mut geo = 0.0;
        let sigma0 = sigma_all;
        let n_init = if sigma0 > 0.0 {
            ((-2.0 * sigma0.log2()).floor() as i32).min(n0)
        } else {
            n0
        };
        for n in n_init..n0 {
            let next_size = f64::powf(2.0, -((n + 1) as f64) / 2.0);
            let sigma = size_with_cache(&current, &cache)?;
            if sigma > next_size {
                let cert = size_split(&current, f, sigma, consts)?;
                current = cert.small.clone();
                levels.push((n, cert.tree_top_length_sum, consts.c_size * f64::powi(2.0, n + 1) * fsq));
            }
            geo += delta * f64::powf(2.0, (n as f64) / 2.0) * fsq;
        }
        // last level keeps the basic-assumption energy certificate
        levels.push((n0, assumption_sum, assumption_bound));
        geo += delta * f64::powf(2.0, (n0 as f64) / 2.0) * fsq;
        let _ = current;
        (n0, levels, geo)
    };

    let min_bound = if fallback_first_branch {
        bound_size_branch
    } else {
        bound_size_branch.min(bound_density_branch)
    };
    let ratio = if min_bound > 0.0 {
        form / min_bound
    } else if form <= 1e-12 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(EffectiveBoundReport {
        n0,
        fallback_first_branch,
        assumption_sum,
        assumption_bound,
        assumption_ok,
        levels,
        geometric_sum,
        form,
        bound_size_branch,
        bound_density_branch,
        min_bound,
        ratio,
        holds: ratio <= consts.c_eff,
    })
}

/// Density-only level decomposition `P = ∪_k P_k` with `dense(P_k) ≲ 2^{-k}`
/// and `Σ|I_T| ≲ 2^k|G|`; feeds the multi-frequency argument.
pub fn density_levels(
    tiles: &TileCollection,
    big_g: &DyadicFunction,
    choice: &ChoiceFunction,
    k_max: u32,
    consts: &Constants,
) -> Result<Vec<(u32, SplitCertificate)>, Error> {
    let ctx = DensityContext::new(big_g, choice)?;
    let mut current = tiles.clone();
    let mut out = Vec::new();
    for k in 0..=k_max {
        if current.is_empty() {
            break;
        }
        let delta = ctx.dense_collection(&current);
        if delta <= 0.0 {
            break;
        }
        if delta > f64::powi(2.0, -(k as i32 + 1)) {
            let cert = density_split(&current, big_g, choice, delta, consts)?;
            current = cert.small.clone();
            if !cert.big.is_empty() {
                out.push((k, cert));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::LacunarySequence;
    use crate::phase::enumerate_bitiles;
    use crate::sampling;

    fn setup(k: u8, seed: u64) -> (
        TileCollection,
        DyadicFunction,
        DyadicFunction,
        ChoiceFunction,
        LacunarySequence,
    ) {
        let seq = LacunarySequence::powers_of_two(k).unwrap();
        let all = enumerate_bitiles(k, &seq).unwrap();
        let mut rng = sampling::seeded_rng(seed);
        let tiles = sampling::random_subcollection(&mut rng, &all, 0.5);
        let f = sampling::random_function(&mut rng, k);
        let g = sampling::random_indicator(&mut rng, k, 0.5);
        let choice = sampling::random_choice(&mut rng, k, &seq);
        (tiles, f, g, choice, seq)
    }

    #[test]
    fn density_split_basic() {
        let consts = Constants::default();
        for seed in 0..10u64 {
            let (tiles, f, g, choice, _) = setup(6, seed);
            let delta = crate::phase::density(&tiles, &g, &choice).unwrap();
            if delta == 0.0 {
                continue;
            }
            let cert = density_split(&tiles, &g, &choice, delta, &consts).unwrap();
            assert!(cert.holds, "seed {seed}: ratio {}", cert.measured_ratio);
            assert!(cert.measured_ratio <= 2.0 + 1e-12, "provable constant is 2");
            let outcome = cert.verify(Some(&f), Some(&g), Some(&choice)).unwrap();
            assert!(outcome.ok(), "seed {seed}: {:?}", outcome.diffs);
        }
    }

    #[test]
    fn density_split_rejects_zero_delta() {
        let consts = Constants::default();
        let (tiles, _, _, choice, _) = setup(5, 1);
        let empty_g = DyadicFunction::zero(5);
        assert!(density_split(&tiles, &empty_g, &choice, 0.0, &consts).is_err());
    }

    #[test]
    fn density_split_single_witness() {
        // single bi-tile whose own rectangle is the only witness
        let consts = Constants::default();
        let k = 4u8;
        let seq = LacunarySequence::new(vec![1]).unwrap();
        let p = BiTile::new(0, 0, 0).unwrap();
        let tiles = TileCollection::new(vec![p]);
        let g = DyadicFunction::indicator_range(k, 0, 8).unwrap();
        let choice = ChoiceFunction::constant(k, 1, &seq).unwrap();
        let delta = crate::phase::density(&tiles, &g, &choice).unwrap();
        assert!((delta - 0.5).abs() < 1e-12);
        let cert = density_split(&tiles, &g, &choice, delta, &consts).unwrap();
        assert_eq!(cert.big.len(), 1);
        assert!(cert.small.is_empty());
        assert_eq!(cert.trees.len(), 1);
        let outcome = cert
            .verify(None, Some(&g), Some(&choice))
            .unwrap();
        assert!(outcome.ok());
    }

    #[test]
    fn size_split_basic() {
        let consts = Constants::default();
        for seed in 0..10u64 {
            let (tiles, f, _, _, _) = setup(6, seed + 100);
            let sigma = crate::phase::size(&tiles, &f).unwrap();
            if sigma == 0.0 {
                continue;
            }
            let cert = size_split(&tiles, &f, sigma, &consts).unwrap();
            assert!(cert.holds, "seed {seed}: ratio {}", cert.measured_ratio);
            assert!(cert.measured_ratio <= 4.0 + 1e-12);
            let b = cert.bessel.as_ref().unwrap();
            assert!(b.pairwise_disjoint, "seed {seed}");
            assert!(b.packet_energy <= b.l2_norm_sq + 1e-10);
            let outcome = cert.verify(Some(&f), None, None).unwrap();
            assert!(outcome.ok(), "seed {seed}: {:?}", outcome.diffs);
            // termination bound: at most |P| trees
            assert!(cert.trees.len() <= tiles.len());
        }
    }

    #[test]
    fn size_split_single_bitile() {
        let consts = Constants::default();
        let k = 4u8;
        let p = BiTile::new(1, 0, 0).unwrap();
        let f = crate::phase::wave_packet(&p.lower(), k).unwrap();
        let tiles = TileCollection::new(vec![p]);
        let cert = size_split(&tiles, &f, 1.0, &consts).unwrap();
        assert_eq!(cert.trees.len(), 1);
        assert!((cert.tree_top_length_sum - 1.0).abs() < 1e-12);
        assert!(cert.small.is_empty());
        assert!(cert.holds);

        assert!(size_split(&tiles, &DyadicFunction::zero(k), 0.0, &consts).is_err());
    }

    #[test]
    fn tree_bound_suite() {
        let consts = Constants::default();
        for seed in 0..20u64 {
            let (tiles, f, g_ind, choice, _) = setup(6, seed + 300);
            // build a tree from a size split (its trees are genuine trees)
            let sigma = crate::phase::size(&tiles, &f).unwrap();
            if sigma == 0.0 {
                continue;
            }
            let cert = size_split(&tiles, &f, sigma, &consts).unwrap();
            let Some(tree) = cert.trees.first() else { continue };
            let g = DyadicFunction::new(
                6,
                g_ind
                    .values()
                    .iter()
                    .map(|&v| if v != 0.0 { 1.0 } else { 0.0 })
                    .collect(),
            )
            .unwrap();
            let report = tree_bound_check(tree, &f, &g, &g_ind, &choice, &consts).unwrap();
            assert!(
                report.holds,
                "seed {seed}: ratio {} (form {}, bound {})",
                report.ratio, report.form, report.bound
            );
            // homogeneity: scaling f leaves the ratio unchanged
            let report2 =
                tree_bound_check(tree, &f.scale(2.0), &g, &g_ind, &choice, &consts).unwrap();
            assert!((report.ratio - report2.ratio).abs() < 1e-9 * (1.0 + report.ratio));
        }
    }

    #[test]
    fn tree_bound_rejects_undominated_g() {
        let consts = Constants::default();
        let (tiles, f, g_ind, choice, _) = setup(5, 7);
        let sigma = crate::phase::size(&tiles, &f).unwrap();
        if sigma == 0.0 {
            return;
        }
        let cert = size_split(&tiles, &f, sigma, &consts).unwrap();
        let Some(tree) = cert.trees.first() else { return };
        let bad_g = DyadicFunction::constant(5, 2.0);
        assert!(tree_bound_check(tree, &f, &bad_g, &g_ind, &choice, &consts).is_err());
    }

    #[test]
    fn decomposition_facts_reverify() {
        let consts = Constants::default();
        for seed in 0..5u64 {
            let (tiles, f, g, choice, _) = setup(6, seed + 500);
            let decomp = carleson_decomposition(&tiles, &f, &g, &choice, &consts).unwrap();
            assert!(decomp.partition_ok(&tiles), "seed {seed}");
            let f_norm = if decomp.f_scale > 0.0 {
                f.scale(1.0 / decomp.f_scale)
            } else {
                f.clone()
            };
            for level in &decomp.levels {
                assert!(
                    level.dense_value <= level.dense_bound + 1e-12,
                    "seed {seed} level {}: dense {} > {}",
                    level.level,
                    level.dense_value,
                    level.dense_bound
                );
                assert!(
                    level.size_value <= level.size_bound + 1e-12,
                    "seed {seed} level {}: size {} > {}",
                    level.level,
                    level.size_value,
                    level.size_bound
                );
                assert!(level.energy_sum <= level.energy_bound + 1e-12);
                for cert in [&level.density_cert, &level.size_cert].into_iter().flatten() {
                    let outcome = cert.verify(Some(&f_norm), Some(&g), Some(&choice)).unwrap();
                    assert!(outcome.ok(), "seed {seed}: {:?}", outcome.diffs);
                }
            }
            // residual is invisible to the form
            assert!(decomp.residual_form <= 1e-12, "seed {seed}");
            // total bound dominates the measured form
            assert!(
                decomp.total_form <= decomp.total_bound + 1e-9,
                "seed {seed}: form {} bound {}",
                decomp.total_form,
                decomp.total_bound
            );
        }
    }

    #[test]
    fn decomposition_empty_input() {
        let consts = Constants::default();
        let k = 5u8;
        let seq = LacunarySequence::powers_of_two(k).unwrap();
        let f = DyadicFunction::walsh(k, 0).unwrap();
        let g = DyadicFunction::constant(k, 1.0);
        let choice = ChoiceFunction::constant(k, 2, &seq).unwrap();
        let decomp =
            carleson_decomposition(&TileCollection::empty(), &f, &g, &choice, &consts).unwrap();
        assert!(decomp.levels.is_empty());
        assert_eq!(decomp.total_form, 0.0);
    }

    #[test]
    fn effective_bound_formula_and_suite() {
        let consts = Constants::default();
        // n₀ pinned by the formula: δ=1/4, ‖f‖₂²=1, |G|=1 → n₀ = 2
        let k = 6u8;
        let seq = LacunarySequence::powers_of_two(k).unwrap();
        let tiles = enumerate_bitiles(k, &seq).unwrap();
        let f = DyadicFunction::walsh(k, 0).unwrap(); // ‖f‖₂ = 1
        let g = DyadicFunction::constant(k, 1.0);
        let choice = ChoiceFunction::constant(k, 2, &seq).unwrap();
        let report =
            effective_bound(&tiles, &f, &g, &choice, 0.25, None, &consts).unwrap();
        assert_eq!(report.n0, 2);

        // δ = 1 → x ≥ 1 → first-branch fallback
        let report = effective_bound(&tiles, &f, &g, &choice, 1.0, None, &consts).unwrap();
        assert!(report.fallback_first_branch);

        // random suites: ratio within C_eff, feeding P from density splits so
        // the basic assumption holds by construction
        for seed in 0..10u64 {
            let (tiles, f, g, choice, _) = setup(6, seed + 700);
            let delta = crate::phase::density(&tiles, &g, &choice).unwrap();
            if delta == 0.0 {
                continue;
            }
            let split = density_split(&tiles, &g, &choice, delta, &consts).unwrap();
            if split.big.is_empty() {
                continue;
            }
            let cert = EnergyCertificate::new(split.trees.clone());
            let dense_big = crate::phase::density(&split.big, &g, &choice).unwrap();
            if dense_big == 0.0 {
                continue;
            }
            let report = effective_bound(
                &split.big,
                &f,
                &g,
                &choice,
                dense_big,
                Some(&cert),
                &consts,
            )
            .unwrap();
            assert!(
                report.holds,
                "seed {seed}: ratio {} form {} min_bound {}",
                report.ratio, report.form, report.min_bound
            );
        }
    }

    #[test]
    fn density_levels_decrease() {
        let consts = Constants::default();
        let (tiles, _, g, choice, _) = setup(6, 900);
        let levels = density_levels(&tiles, &g, &choice, 10, &consts).unwrap();
        for (k, cert) in &levels {
            assert!(cert.threshold <= f64::powi(2.0, -(*k as i32)) + 1e-12);
            assert!(cert.holds);
        }
        // levels are disjoint
        let mut seen: Vec<BiTile> = Vec::new();
        for (_, cert) in &levels {
            for p in cert.big.bitiles() {
                assert!(!seen.contains(p));
                seen.push(*p);
            }
        }
    }
}
