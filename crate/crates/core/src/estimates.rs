//! End-to-end inequality experiments: major subsets, the restricted
//! weak-type pairing, the strong-type iteration, distributional curves, the
//! exact Walsh Antonov reduction, and the final weak/strong norm checks.

use crate::config::Constants;
use crate::dyadic::{
    decreasing_rearrangement, lacunary_maximal, weak_l1_norm, DyadicFunction, LacunarySequence,
};
use crate::error::Error;
use crate::multifreq::{choose_lambda, exceptional_cover, ExceptionalCover};
use crate::orlicz::{log_plus, log_plus1, loglog_plus, luxembourg_norm, OrliczGauge};
use crate::phase::{bilinear_form, enumerate_bitiles};
use crate::tiles::{BiTile, ChoiceFunction, TileCollection};

/// How the linearization `N(x)` is chosen in an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChoiceStrategy {
    /// The adversarial argmax of `|S⁻_{n_j} f|` (ties to the smallest index).
    Argmax,
    /// Constant `N ≡ n_j` with the given term index.
    Constant(usize),
}

/// `G' = G \ {M 1_F > λ}` with `λ` from [`choose_lambda`]; a major subset
/// whenever the gate `|F| ≤ C₀|G|` holds.
#[derive(Debug, Clone)]
pub struct MajorSubset {
    pub g_prime: DyadicFunction,
    pub lambda: Option<f64>,
    pub cover: Option<ExceptionalCover>,
    /// Gate failed: `G' = G` and the caller should use the L² regime.
    pub l2_regime: bool,
}

pub fn major_subset(
    f_ind: &DyadicFunction,
    g_ind: &DyadicFunction,
    consts: &Constants,
) -> Result<MajorSubset, Error> {
    let k = f_ind.resolution();
    if g_ind.resolution() != k {
        return Err(Error::ResolutionMismatch(k, g_ind.resolution()));
    }
    if !f_ind.is_indicator() || !g_ind.is_indicator() {
        return Err(Error::Precondition("F and G must be indicators".into()));
    }
    let fm = f_ind.measure();
    let gm = g_ind.measure();
    if fm == 0.0 {
        return Ok(MajorSubset {
            g_prime: g_ind.clone(),
            lambda: None,
            cover: None,
            l2_regime: false,
        });
    }
    let lambda = match choose_lambda(fm, gm, consts) {
        Ok(l) => l,
        Err(_) => {
            return Ok(MajorSubset {
                g_prime: g_ind.clone(),
                lambda: None,
                cover: None,
                l2_regime: true,
            })
        }
    };
    let cover = exceptional_cover(f_ind, lambda)?;
    let g_prime = DyadicFunction::new(
        k,
        (0..g_ind.len())
            .map(|c| {
                if g_ind.value(c) != 0.0 && !cover.covers_cell(c, k) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
    )?;
    Ok(MajorSubset {
        g_prime,
        lambda: Some(lambda),
        cover: Some(cover),
        l2_regime: false,
    })
}

fn argmax_or_constant(
    f: &DyadicFunction,
    seq: &LacunarySequence,
    strategy: ChoiceStrategy,
) -> Result<(DyadicFunction, ChoiceFunction), Error> {
    match strategy {
        ChoiceStrategy::Argmax => lacunary_maximal(f, seq),
        ChoiceStrategy::Constant(j) => {
            let n = *seq
                .terms()
                .get(j)
                .ok_or_else(|| Error::BadChoice(format!("term index {j} out of range")))?;
            let s = crate::dyadic::partial_sum(f, n)?;
            let choice = ChoiceFunction::constant(f.resolution(), n, seq)?;
            Ok((s.abs(), choice))
        }
    }
}

/// Bi-tiles whose time interval meets both supports.
pub fn restrict_collection(
    all: &TileCollection,
    f_ind: &DyadicFunction,
    g_ind: &DyadicFunction,
) -> TileCollection {
    let k = f_ind.resolution();
    let members: Vec<BiTile> = all
        .bitiles()
        .iter()
        .filter(|p| {
            let cells = p.time.cells(k);
            cells.clone().any(|c| f_ind.value(c) != 0.0)
                && cells.clone().any(|c| g_ind.value(c) != 0.0)
        })
        .copied()
        .collect();
    TileCollection::new(members)
}

/// One restricted weak-type measurement `|⟨Cf, g⟩|` against
/// `|F|·loglog_+(|G|/|F|)`.
#[derive(Debug, Clone)]
pub struct RestrictedWeakOutcome {
    pub f_measure: f64,
    pub g_measure: f64,
    pub g_prime_measure: f64,
    pub lambda: Option<f64>,
    pub l2_regime: bool,
    /// `⟨Cf, g⟩ = ∫_{G'} |Cf|` for `g = sign(Cf)·1_{G'}`.
    pub form: f64,
    /// The same number through the bilinear form on the restricted collection.
    pub form_bilinear: f64,
    pub bound: f64,
    pub ratio: f64,
    /// L²-regime comparison `‖f‖₂‖g‖₂` (the bound in the gate-failure branch).
    pub l2_bound: f64,
    pub pass: bool,
}

pub fn restricted_weak_experiment(
    f_ind: &DyadicFunction,
    g_ind: &DyadicFunction,
    seq: &LacunarySequence,
    strategy: ChoiceStrategy,
    consts: &Constants,
) -> Result<RestrictedWeakOutcome, Error> {
    let k = f_ind.resolution();
    seq.check_resolution(k)?;
    let fm = f_ind.measure();
    let gm = g_ind.measure();
    let major = major_subset(f_ind, g_ind, consts)?;
    let gp = &major.g_prime;
    let gpm = gp.measure();
    if !major.l2_regime && fm > 0.0 && gpm < gm / 2.0 - 1e-12 {
        return Err(Error::Precondition(format!(
            "major subset failed: |G'| = {gpm} < |G|/2 = {}",
            gm / 2.0
        )));
    }
    let (cf_abs, choice) = argmax_or_constant(f_ind, seq, strategy)?;
    // ⟨Cf, g⟩ with g = sign(Cf)·1_{G'} is ∫_{G'} |Cf|
    let form = cf_abs
        .values()
        .iter()
        .zip(gp.values())
        .filter(|(_, &ind)| ind != 0.0)
        .map(|(v, _)| v)
        .sum::<f64>()
        / cf_abs.len() as f64;
    // cross-check through the bilinear form on the restricted collection
    let all = enumerate_bitiles(k, seq)?;
    let restricted = restrict_collection(&all, f_ind, gp);
    let signs = sign_against(f_ind, &choice, gp)?;
    let form_bilinear = bilinear_form(&restricted, f_ind, &signs, &choice)?;
    let bound = if fm > 0.0 {
        fm * loglog_plus(gm / fm)?
    } else {
        0.0
    };
    let ratio = if bound > 0.0 { form / bound } else { 0.0 };
    let l2_bound = f_ind.l2_norm() * gpm.sqrt();
    let pass = if major.l2_regime {
        form <= consts.c_rw * l2_bound + 1e-12
    } else {
        ratio <= consts.c_rw
    };
    Ok(RestrictedWeakOutcome {
        f_measure: fm,
        g_measure: gm,
        g_prime_measure: gpm,
        lambda: major.lambda,
        l2_regime: major.l2_regime,
        form,
        form_bilinear,
        bound,
        ratio,
        l2_bound,
        pass,
    })
}

/// `g = sign(S⁻_{N(x)} f)·1_{G'}` as a dyadic function.
pub(crate) fn sign_against(
    f: &DyadicFunction,
    choice: &ChoiceFunction,
    gp: &DyadicFunction,
) -> Result<DyadicFunction, Error> {
    let k = f.resolution();
    let coeffs = crate::dyadic::walsh_transform(f);
    let mut distinct: Vec<u64> = choice.assignment().to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let mut partials = std::collections::BTreeMap::new();
    for n in distinct {
        let mut c = coeffs.clone();
        for v in c.iter_mut().skip(n as usize) {
            *v = 0.0;
        }
        partials.insert(n, crate::dyadic::inverse_walsh_transform(k, &c)?);
    }
    DyadicFunction::new(
        k,
        (0..f.len())
            .map(|i| {
                if gp.value(i) != 0.0 {
                    partials[&choice.value(i)].value(i).signum()
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

#[derive(Debug, Clone)]
pub struct StrongTypeStep {
    pub t: u32,
    pub g_measure: f64,
    pub g_prime_measure: f64,
    /// `⟨Cf, g_t⟩ = ∫_{G'_t} |Cf|`.
    pub pairing: f64,
    pub l2_step: bool,
}

#[derive(Debug, Clone)]
pub struct StrongTypeOutcome {
    pub f_measure: f64,
    /// `2 + ⌈log₂ |F|^{-1}⌉`.
    pub t0: u32,
    pub steps: Vec<StrongTypeStep>,
    pub stopped_at: u32,
    /// `Σ_t |G'_t)` — must be exactly 1: the slices partition `[0,1]`.
    pub partition_total: f64,
    pub l1_from_steps: f64,
    pub l1_direct: f64,
    /// Against `|F|·log_+(1/|F|)·loglog_+(1/|F|)` (27-offset logs).
    pub ratio_paper: f64,
    /// Against the offset-1 logs, where desk-scale growth is visible.
    pub ratio_normalized: Option<f64>,
}

/// The recursion `G_{t+1} = G_t \ G'_t` with `g_t = sign(Cf)·1_{G'_t}`,
/// summing the pairings to `‖Cf‖₁` exactly; `N` is the argmax linearization.
pub fn strong_type_iteration(
    f_ind: &DyadicFunction,
    seq: &LacunarySequence,
    consts: &Constants,
) -> Result<StrongTypeOutcome, Error> {
    let k = f_ind.resolution();
    seq.check_resolution(k)?;
    if !f_ind.is_indicator() {
        return Err(Error::Precondition("F must be an indicator".into()));
    }
    let fm = f_ind.measure();
    if !(fm > 0.0) {
        return Err(Error::Precondition("F must have positive measure".into()));
    }
    let (cf_abs, _) = lacunary_maximal(f_ind, seq)?;
    let t0 = 2 + (1.0 / fm).log2().ceil() as u32;

    let mut g_t = DyadicFunction::constant(k, 1.0);
    let mut steps: Vec<StrongTypeStep> = Vec::new();
    let mut t = 0u32;
    loop {
        let gm = g_t.measure();
        let major = major_subset(f_ind, &g_t, consts)?;
        let finish = gm <= fm || major.l2_regime || gm == 0.0;
        let g_prime = if finish { g_t.clone() } else { major.g_prime };
        let pairing = cf_abs
            .values()
            .iter()
            .zip(g_prime.values())
            .filter(|(_, &ind)| ind != 0.0)
            .map(|(v, _)| v)
            .sum::<f64>()
            / cf_abs.len() as f64;
        steps.push(StrongTypeStep {
            t,
            g_measure: gm,
            g_prime_measure: g_prime.measure(),
            pairing,
            l2_step: finish,
        });
        if finish {
            break;
        }
        g_t = DyadicFunction::new(
            k,
            g_t.values()
                .iter()
                .zip(g_prime.values())
                .map(|(g, gp)| if *gp != 0.0 { 0.0 } else { *g })
                .collect(),
        )?;
        t += 1;
        if t > t0 + 4 {
            return Err(Error::Precondition(format!(
                "iteration failed to stop by t₀+4 = {}",
                t0 + 4
            )));
        }
    }

    let partition_total: f64 = steps.iter().map(|s| s.g_prime_measure).sum();
    let l1_from_steps: f64 = steps.iter().map(|s| s.pairing).sum();
    let l1_direct = cf_abs.l1_norm();
    let denom_paper = fm * log_plus(1.0 / fm)? * loglog_plus(1.0 / fm)?;
    let lp1 = log_plus1(1.0 / fm)?;
    let denom_norm = fm * lp1 * lp1.ln();
    Ok(StrongTypeOutcome {
        f_measure: fm,
        t0,
        stopped_at: steps.last().map(|s| s.t).unwrap_or(0),
        steps,
        partition_total,
        l1_from_steps,
        l1_direct,
        ratio_paper: l1_direct / denom_paper,
        ratio_normalized: if denom_norm > 0.0 {
            Some(l1_direct / denom_norm)
        } else {
            None
        },
    })
}

/// Log-spaced grid on `[2^-K, 1]`, 64 points per decade, emitted ascending.
pub fn log_grid(resolution: u8) -> Vec<f64> {
    let t_min = f64::powi(2.0, -(resolution as i32));
    let step = f64::powf(10.0, -1.0 / 64.0);
    let mut grid = Vec::new();
    let mut t = 1.0f64;
    while t > t_min {
        grid.push(t);
        t *= step;
    }
    grid.push(t_min);
    grid.reverse();
    grid.dedup();
    grid
}

#[derive(Debug, Clone)]
pub struct DistributionOutcome {
    pub f_mass: f64,
    /// `(t, (C_lac f)*(t), ratio)` on the grid.
    pub points: Vec<(f64, f64, f64)>,
    pub sup_ratio: f64,
    pub pass: bool,
}

/// The rearranged-curve check
/// `t·(C_lac f)*(t) ≤ C·|F|·loglog_+(t/|F|)` on a log grid.  `f_mass` is
/// `|F|` for restricted inputs and `‖f‖₁` for the Antonov-reduced variant.
pub fn distribution_curve(
    f: &DyadicFunction,
    f_mass: f64,
    seq: &LacunarySequence,
    consts: &Constants,
) -> Result<DistributionOutcome, Error> {
    let k = f.resolution();
    seq.check_resolution(k)?;
    if !(f_mass > 0.0) {
        return Ok(DistributionOutcome {
            f_mass,
            points: Vec::new(),
            sup_ratio: 0.0,
            pass: true,
        });
    }
    let (cf_abs, _) = lacunary_maximal(f, seq)?;
    let curve = decreasing_rearrangement(&cf_abs);
    let mut points = Vec::new();
    let mut sup_ratio = 0.0f64;
    for t in log_grid(k) {
        let v = curve.eval(t);
        let ratio = t * v / (f_mass * loglog_plus(t / f_mass)?);
        sup_ratio = sup_ratio.max(ratio);
        points.push((t, v, ratio));
    }
    Ok(DistributionOutcome {
        f_mass,
        points,
        sup_ratio,
        pass: sup_ratio <= consts.c_dist,
    })
}

/// The Walsh Antonov reduction: replace `0 ≤ f ≤ 1` by an indicator of equal
/// mass whose cell averages at scale `2^-K` agree with `f`'s, so that
/// `S⁻_n(f − 1_F) = 0` exactly for all `n ≤ 2^K`.  Values must be dyadic
/// rationals with denominator dividing `2^{K'−K}`.
pub fn antonov_indicator(f: &DyadicFunction, k_prime: u8) -> Result<DyadicFunction, Error> {
    let k = f.resolution();
    if k_prime <= k {
        return Err(Error::Domain(format!(
            "target resolution {k_prime} must exceed {k}"
        )));
    }
    if k_prime > crate::dyadic::MAX_RESOLUTION {
        return Err(Error::ResolutionTooLarge(
            k_prime as u32,
            crate::dyadic::MAX_RESOLUTION as u32,
        ));
    }
    let rep = 1usize << (k_prime - k);
    let mut values = vec![0.0; 1 << k_prime];
    for (i, &v) in f.values().iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Precondition(format!(
                "value {v} at cell {i} is outside [0,1]"
            )));
        }
        let scaled = v * rep as f64;
        let count = scaled.round();
        if scaled != count {
            return Err(Error::Precondition(format!(
                "value {v} at cell {i} is not a dyadic rational with denominator 2^{}; \
                 raise the target resolution",
                k_prime - k
            )));
        }
        for slot in values.iter_mut().skip(i * rep).take(count as usize) {
            *slot = 1.0;
        }
    }
    DyadicFunction::new(k_prime, values)
}

#[derive(Debug, Clone)]
pub struct FactorizationCheck {
    pub d_of_mass: f64,
    pub sup_ratio: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct FinalNormOutcome {
    pub weak_lhs: f64,
    pub weak_rhs: f64,
    pub weak_ratio: f64,
    pub l1_lhs: f64,
    pub l1_rhs: f64,
    pub l1_ratio: f64,
    /// Present iff `‖f‖_∞ ≤ 1` and `f ≠ 0` (the atom case).
    pub factorization: Option<FactorizationCheck>,
}

/// The two final norm inequalities plus the atom factorization check
/// `(Cf)*(t) ≤ C·D(‖f‖₁)·R(t)` with `D(s) = s·loglog_+(1/s)`, `R(t) = 1/t`.
pub fn final_norm_checks(
    f: &DyadicFunction,
    seq: &LacunarySequence,
    consts: &Constants,
) -> Result<FinalNormOutcome, Error> {
    let k = f.resolution();
    seq.check_resolution(k)?;
    let (cf_abs, _) = lacunary_maximal(f, seq)?;
    let weak_lhs = weak_l1_norm(&cf_abs);
    let weak_rhs = luxembourg_norm(f, &OrliczGauge::l_loglogl_logloglogl());
    let l1_lhs = cf_abs.l1_norm();
    let l1_rhs = luxembourg_norm(f, &OrliczGauge::l_logl_loglogl());
    let factorization = if f.sup_norm() <= 1.0 && f.l1_norm() > 0.0 {
        let mass = f.l1_norm();
        let d = mass * loglog_plus(1.0 / mass)?;
        let curve = decreasing_rearrangement(&cf_abs);
        let mut sup_ratio = 0.0f64;
        for t in log_grid(k) {
            // against D(‖f‖₁)·R(t) with R(t) = 1/t
            let ratio = curve.eval(t) * t / d;
            sup_ratio = sup_ratio.max(ratio);
        }
        Some(FactorizationCheck {
            d_of_mass: d,
            sup_ratio,
            pass: sup_ratio <= consts.c_fac,
        })
    } else {
        None
    };
    Ok(FinalNormOutcome {
        weak_lhs,
        weak_rhs,
        weak_ratio: if weak_rhs > 0.0 { weak_lhs / weak_rhs } else { 0.0 },
        l1_lhs,
        l1_rhs,
        l1_ratio: if l1_rhs > 0.0 { l1_lhs / l1_rhs } else { 0.0 },
        factorization,
    })
}
