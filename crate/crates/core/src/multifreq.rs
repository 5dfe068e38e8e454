//! Multi-frequency Calderon-Zygmund machinery: exceptional intervals, the
//! local lacunary tile families `Q_I`, the projection `φ`, and the
//! Zygmund/Khintchine inequalities that control its L² norm.
//!
//! The projection replaces a function supported on the exceptional intervals
//! by its component in the span of finitely many local wave packets, with
//! `⟨f·1_I − φ_I, w_{P_ℓ}⟩ = 0` exactly — a finite-dimensional orthogonal
//! projection, so the bilinear form cannot tell `f` and `φ` apart.

use crate::config::Constants;
use crate::dyadic::{walsh_transform, DyadicFunction, LacunarySequence};
use crate::error::Error;
use crate::orlicz::{log_plus, loglog_plus, luxembourg_norm, luxembourg_norm_slice, OrliczGauge};
use crate::phase::{wave_packet, PacketCache};
use crate::tiles::{DyadicInterval, Tile, TileCollection};

/// `λ = 2|F|/|G|` under the gate `|F| ≤ C₀|G|`; the dyadic weak-(1,1) bound
/// with constant 1 then removes at most `|F|/λ = |G|/2`, leaving a major
/// subset.  `C₀ ≤ 1/4` keeps `λ ≤ 1/2 < 1`.
pub fn choose_lambda(f_measure: f64, g_measure: f64, consts: &Constants) -> Result<f64, Error> {
    if !(f_measure > 0.0) {
        return Err(Error::Precondition(format!(
            "|F| must be positive, got {f_measure}"
        )));
    }
    if f_measure > consts.c_zero * g_measure {
        return Err(Error::Precondition(format!(
            "|F| = {f_measure} exceeds C0·|G| = {}; use the L² branch",
            consts.c_zero * g_measure
        )));
    }
    Ok(2.0 * f_measure / g_measure)
}

/// Maximal dyadic intervals of `{M 1_F > λ}` with their `F`-densities.
#[derive(Debug, Clone)]
pub struct ExceptionalCover {
    pub lambda: f64,
    pub intervals: Vec<DyadicInterval>,
    /// `|F ∩ I| / |I|` per interval.
    pub densities: Vec<f64>,
    /// Set when `λ ≥ 1` made the construction vacuous.
    pub degenerate: bool,
}

impl ExceptionalCover {
    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(DyadicInterval::length).sum()
    }

    pub fn covers_cell(&self, cell: usize, resolution: u8) -> bool {
        self.intervals
            .iter()
            .any(|i| i.contains_cell(cell, resolution))
    }

    /// Re-check the structural invariants against `F`.
    pub fn verify(&self, f_ind: &DyadicFunction) -> Result<(), Error> {
        let k = f_ind.resolution();
        for (a, i) in self.intervals.iter().enumerate() {
            for j in &self.intervals[a + 1..] {
                if i.intersects(j) {
                    return Err(Error::Precondition(format!(
                        "intervals {i} and {j} overlap"
                    )));
                }
            }
            let mean = interval_mean(f_ind, i);
            if !(mean > self.lambda) {
                return Err(Error::Precondition(format!(
                    "interval {i} has mean {mean} ≤ λ"
                )));
            }
            if i.scale > 0 {
                let parent = i.ancestor(i.scale - 1).expect("scale > 0");
                let pmean = interval_mean(f_ind, &parent);
                if pmean > self.lambda {
                    return Err(Error::Precondition(format!("interval {i} is not maximal")));
                }
                // dyadic maximality gives |F ∩ I| ≤ 2λ|I|
                if mean > 2.0 * self.lambda + 1e-12 {
                    return Err(Error::Precondition(format!(
                        "interval {i} has density {mean} > 2λ"
                    )));
                }
            }
            let density = self.densities[a];
            if (density - mean).abs() > 1e-12 {
                return Err(Error::Precondition(format!(
                    "recorded density {density} differs from {mean}"
                )));
            }
        }
        if self.total_length() > f_ind.measure() / self.lambda + 1e-12 {
            return Err(Error::Precondition(format!(
                "Σ|I| = {} exceeds |F|/λ = {}",
                self.total_length(),
                f_ind.measure() / self.lambda
            )));
        }
        // F itself is covered when λ < 1
        if self.lambda < 1.0 {
            for cell in f_ind.support_cells() {
                if !self.covers_cell(cell, k) {
                    return Err(Error::Precondition(format!("F-cell {cell} not covered")));
                }
            }
        }
        Ok(())
    }
}

fn interval_mean(f: &DyadicFunction, i: &DyadicInterval) -> f64 {
    let cells = i.cells(f.resolution());
    let width = cells.len();
    f.values()[cells].iter().sum::<f64>() / width as f64
}

/// Stopping-time construction from `[0,1]` downward: emit a dyadic interval
/// as soon as the mean of `1_F` on it exceeds `λ`.
pub fn exceptional_cover(f_ind: &DyadicFunction, lambda: f64) -> Result<ExceptionalCover, Error> {
    if !(lambda > 0.0) {
        return Err(Error::Precondition(format!(
            "λ must be positive, got {lambda}"
        )));
    }
    if !f_ind.is_indicator() {
        return Err(Error::Precondition("F must be an indicator".into()));
    }
    if lambda >= 1.0 {
        return Ok(ExceptionalCover {
            lambda,
            intervals: Vec::new(),
            densities: Vec::new(),
            degenerate: true,
        });
    }
    let k = f_ind.resolution();
    let mut intervals = Vec::new();
    let mut densities = Vec::new();
    let mut stack = vec![DyadicInterval::unit()];
    while let Some(i) = stack.pop() {
        let mean = interval_mean(f_ind, &i);
        if mean > lambda {
            intervals.push(i);
            densities.push(mean);
        } else if i.scale < k && mean > 0.0 {
            let left = DyadicInterval::new(i.scale + 1, 2 * i.index)?;
            let right = DyadicInterval::new(i.scale + 1, 2 * i.index + 1)?;
            stack.push(right);
            stack.push(left);
        }
    }
    intervals.reverse();
    densities.reverse();
    Ok(ExceptionalCover {
        lambda,
        intervals,
        densities,
        degenerate: false,
    })
}

/// The local tile family over one exceptional interval, with the lacunarity
/// of its frequency indices.
#[derive(Debug, Clone)]
pub struct LocalTiles {
    pub interval: DyadicInterval,
    /// Tiles with time interval exactly `I` meeting the lower half of some
    /// collection member, sorted by frequency.
    pub tiles: Vec<Tile>,
    /// Local frequencies: `ω_p = [μ_p, μ_p+1]·|I|^{-1}`.
    pub mus: Vec<u64>,
    /// `1 + ⌈2/(α−1)⌉` leading tiles excluded from the lacunarity check.
    pub prefix_len: usize,
    /// Minimal consecutive ratio of the tail (`∞` when under two terms).
    pub tail_ratio: f64,
    /// Tail lacunarity reached `(α+1)/2`.
    pub tail_ok: bool,
    /// Every witnessing pair satisfied `p < P_ℓ` and `p < P_u`.
    pub structure_ok: bool,
}

/// `Q_I = {p : I_p = I, ∃P ∈ P_k, p ∩ P_ℓ ≠ ∅}`, by frequency-interval
/// intersection arithmetic.
pub fn collect_local_tiles(
    interval: DyadicInterval,
    collection: &TileCollection,
    alpha: f64,
) -> Result<LocalTiles, Error> {
    if !(alpha > 1.0) {
        return Err(Error::BadSequence(format!(
            "lacunarity {alpha} must exceed 1"
        )));
    }
    let s_i = interval.scale;
    let mut mus: Vec<u64> = Vec::new();
    let mut structure_ok = true;
    for p in collection.bitiles() {
        if !interval.intersects(&p.time) {
            continue;
        }
        let lower = p.lower();
        let lower_freq = lower.freq();
        // frequency blocks of length 2^{s_I} meeting ω_{P_ℓ}
        if s_i >= lower_freq.level {
            // one block contains the whole of ω_{P_ℓ}
            let mu = lower_freq.lower_edge() >> s_i;
            let tile = Tile {
                time: interval,
                freq_index: mu,
            };
            if !(tile.leq(&lower) && tile.leq(&p.upper())) {
                structure_ok = false;
            }
            mus.push(mu);
        } else {
            // finer blocks inside ω_{P_ℓ}; geometry the pipeline never
            // produces (it forces I ⊊ I_P), recorded as a structure failure
            structure_ok = false;
            let shift = lower_freq.level - s_i;
            for off in 0..1u64 << shift {
                mus.push((lower_freq.index << shift) + off);
            }
        }
    }
    mus.sort_unstable();
    mus.dedup();
    let tiles: Vec<Tile> = mus
        .iter()
        .map(|&mu| Tile {
            time: interval,
            freq_index: mu,
        })
        .collect();
    let prefix_len = 1 + (2.0 / (alpha - 1.0)).ceil() as usize;
    let tail = &mus[prefix_len.min(mus.len())..];
    let tail_ratio = if tail.len() < 2 {
        f64::INFINITY
    } else {
        tail.windows(2)
            .map(|w| w[1] as f64 / w[0] as f64)
            .fold(f64::INFINITY, f64::min)
    };
    let tail_ok = tail_ratio >= (alpha + 1.0) / 2.0;
    Ok(LocalTiles {
        interval,
        tiles,
        mus,
        prefix_len,
        tail_ratio,
        tail_ok,
        structure_ok,
    })
}

/// One local projection `φ_I = Σ_{p ∈ Q_I} ⟨f, w_p⟩ w_p`.
#[derive(Debug, Clone)]
pub struct LocalProjection {
    pub tiles: LocalTiles,
    pub coefficients: Vec<f64>,
    /// Supported on `I`; the tiles over one interval are frequency-disjoint,
    /// so `‖φ_I‖₂² = Σ ⟨f,w_p⟩²` exactly.
    pub phi: DyadicFunction,
    pub phi_l2: f64,
}

pub fn local_projection(f: &DyadicFunction, tiles: LocalTiles) -> Result<LocalProjection, Error> {
    let k = f.resolution();
    let cache = PacketCache::new(f);
    let mut phi = DyadicFunction::zero(k);
    let mut coefficients = Vec::with_capacity(tiles.tiles.len());
    let mut energy = 0.0;
    for p in &tiles.tiles {
        let c = cache.coefficient(p)?;
        coefficients.push(c);
        energy += c * c;
        if c != 0.0 {
            phi = phi.add(&wave_packet(p, k)?.scale(c))?;
        }
    }
    Ok(LocalProjection {
        tiles,
        coefficients,
        phi,
        phi_l2: energy.sqrt(),
    })
}

/// The assembled projection `φ = Σ_I φ_I` plus the exact-cancellation
/// witness.
#[derive(Debug, Clone)]
pub struct MultifreqProjection {
    pub locals: Vec<LocalProjection>,
    pub phi: DyadicFunction,
    /// `max |⟨f·1_I − φ_I, w_{P_ℓ}⟩|` over all members and intervals.
    pub cancellation_max: f64,
}

/// Build `φ` and verify `⟨f·1_I − φ_I, w_{P_ℓ}⟩ = 0` for every member of the
/// collection and every cover interval.  `f` must be supported inside the
/// cover.
pub fn multifreq_project(
    f: &DyadicFunction,
    cover: &ExceptionalCover,
    locals: Vec<LocalProjection>,
    collection: &TileCollection,
) -> Result<MultifreqProjection, Error> {
    let k = f.resolution();
    for cell in 0..f.len() {
        if f.value(cell) != 0.0 && !cover.covers_cell(cell, k) {
            return Err(Error::Precondition(format!(
                "f is not supported in the cover (cell {cell})"
            )));
        }
    }
    let mut phi = DyadicFunction::zero(k);
    for l in &locals {
        phi = phi.add(&l.phi)?;
    }
    let mut cancellation_max = 0.0f64;
    for p in collection.bitiles() {
        let lower = p.lower();
        if lower.scale() > k || lower.freq_index >= 1u64 << (k - lower.scale()) {
            continue; // unrepresentable member: no packet to test against
        }
        let w = wave_packet(&lower, k)?;
        for l in &locals {
            let i = l.tiles.interval;
            if !i.intersects(&p.time) {
                continue;
            }
            let mut ip = 0.0;
            for c in i.cells(k) {
                ip += (f.value(c) - l.phi.value(c)) * w.value(c);
            }
            ip /= f.len() as f64;
            cancellation_max = cancellation_max.max(ip.abs());
        }
    }
    Ok(MultifreqProjection {
        locals,
        phi,
        cancellation_max,
    })
}

/// Zygmund's inequality `‖{f̂(n_j)}‖_{ℓ²} ≲ ‖f‖_{L(logL)^{1/2}}`, reported as
/// the measured ratio.
#[derive(Debug, Clone)]
pub struct ZygmundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

pub fn zygmund_ratio(f: &DyadicFunction, seq: &LacunarySequence) -> Result<ZygmundReport, Error> {
    seq.check_resolution(f.resolution())?;
    let coeffs = walsh_transform(f);
    let lhs = seq
        .terms()
        .iter()
        .map(|&n| {
            let c = coeffs[n as usize];
            c * c
        })
        .sum::<f64>()
        .sqrt();
    let rhs = luxembourg_norm(f, &OrliczGauge::l_logl_half());
    let ratio = if lhs == 0.0 {
        0.0
    } else if rhs > 0.0 {
        lhs / rhs
    } else {
        f64::INFINITY
    };
    Ok(ZygmundReport { lhs, rhs, ratio })
}

/// Khintchine-type ratios for `h = Σ a_j W_{n_j}`: the `L^p` form
/// `‖h‖_p / (√p ‖a‖_{ℓ²})` and the `exp(L²)` Luxembourg form.
#[derive(Debug, Clone)]
pub struct KhintchineReport {
    pub p: u32,
    pub lp_norm: f64,
    pub lp_ratio: f64,
    pub exp_l2_norm: f64,
    pub exp_l2_ratio: f64,
}

pub fn khintchine_ratio(
    a: &[f64],
    seq: &LacunarySequence,
    p: u32,
) -> Result<KhintchineReport, Error> {
    if a.is_empty() || a.len() > seq.len() {
        return Err(Error::BadSequence(format!(
            "{} coefficients for {} terms",
            a.len(),
            seq.len()
        )));
    }
    let ell2 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if ell2 == 0.0 {
        return Err(Error::Precondition(
            "coefficients must not all vanish".into(),
        ));
    }
    // smallest resolution holding every frequency
    let max_n = seq.terms()[a.len() - 1];
    let mut resolution = 1u8;
    while 1u64 << resolution <= max_n {
        resolution += 1;
    }
    let mut h = DyadicFunction::zero(resolution);
    for (j, &aj) in a.iter().enumerate() {
        if aj != 0.0 {
            h = h.add(&DyadicFunction::walsh(resolution, seq.terms()[j])?.scale(aj))?;
        }
    }
    let lp_norm = h.lp_norm(p as f64);
    let exp_l2_norm = luxembourg_norm(&h, &OrliczGauge::exp_l2());
    Ok(KhintchineReport {
        p,
        lp_norm,
        lp_ratio: lp_norm / ((p as f64).sqrt() * ell2),
        exp_l2_norm,
        exp_l2_ratio: exp_l2_norm / ell2,
    })
}

/// Per-interval and global L² control of the projection.
#[derive(Debug, Clone)]
pub struct PhiChainRow {
    pub interval: DyadicInterval,
    pub interval_length: f64,
    pub q_count: usize,
    pub tail_ratio: f64,
    pub phi_norm: f64,
    pub local_orlicz: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone)]
pub struct PhiChainReport {
    pub rows: Vec<PhiChainRow>,
    pub phi_l2: f64,
    pub global_bound: f64,
    pub global_ratio: f64,
    pub max_interval_ratio: f64,
    pub holds: bool,
}

/// Checks `‖φ_I‖₂ ≲ λ(log_+ 1/λ)^{1/2}|I|^{1/2}` per interval and
/// `‖φ‖₂ ≲ |F|·|G|^{-1/2}(log_+ 1/λ)^{1/2}` globally.
pub fn phi_l2_chain(
    f_ind: &DyadicFunction,
    g_measure: f64,
    cover: &ExceptionalCover,
    projection: &MultifreqProjection,
    consts: &Constants,
) -> Result<PhiChainReport, Error> {
    let lambda = cover.lambda;
    let log_term = log_plus(1.0 / lambda)?.sqrt();
    let mut rows = Vec::new();
    let mut max_interval_ratio = 0.0f64;
    for l in &projection.locals {
        let i = l.tiles.interval;
        let cells = i.cells(f_ind.resolution());
        let local_orlicz =
            luxembourg_norm_slice(&f_ind.values()[cells], &OrliczGauge::l_logl_half());
        let bound = lambda * log_term * i.length().sqrt();
        let ratio = if bound > 0.0 { l.phi_l2 / bound } else { 0.0 };
        max_interval_ratio = max_interval_ratio.max(ratio);
        rows.push(PhiChainRow {
            interval: i,
            interval_length: i.length(),
            q_count: l.tiles.tiles.len(),
            tail_ratio: l.tiles.tail_ratio,
            phi_norm: l.phi_l2,
            local_orlicz,
            bound,
            ratio,
        });
    }
    let phi_l2 = projection.phi.l2_norm();
    let global_bound = f_ind.measure() / g_measure.sqrt() * log_term;
    let global_ratio = if global_bound > 0.0 {
        phi_l2 / global_bound
    } else {
        0.0
    };
    Ok(PhiChainReport {
        rows,
        phi_l2,
        global_bound,
        global_ratio,
        max_interval_ratio,
        holds: max_interval_ratio <= consts.c_phi && global_ratio <= consts.c_phi,
    })
}

/// `k₀ = C_k·loglog_+(1/λ)` and the geometric tail
/// `Σ_{k>k₀} 2^{-k/2}(log_+ 1/λ)^{1/2}` (coefficient of `|F|`); the level
/// estimates sum to at most `|F|` once the tail coefficient is ≤ 1.
pub fn k0_tail_check(lambda: f64, consts: &Constants) -> Result<(f64, f64, bool), Error> {
    let k0 = consts.c_k * loglog_plus(1.0 / lambda)?;
    let first = k0.floor() as i32 + 1;
    let tail_coeff = log_plus(1.0 / lambda)?.sqrt() * f64::powf(2.0, -(first as f64) / 2.0)
        / (1.0 - std::f64::consts::FRAC_1_SQRT_2);
    Ok((k0, tail_coeff, tail_coeff <= 1.0))
}
