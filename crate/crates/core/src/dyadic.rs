//! Exact Walsh-Paley analysis on dyadic step functions.
//!
//! A [`DyadicFunction`] is a real-valued function on `[0,1]`, constant on the
//! `2^K` cells of the dyadic grid at resolution `K`.  Everything here is exact
//! up to floating rounding: transforms are butterflies in Paley ordering,
//! partial sums use the half-open convention `Σ_{k<n}`, and the maximal
//! operator is the dyadic one.

use crate::error::Error;
use crate::tiles::ChoiceFunction;

/// Hard cap on the grid resolution (2^24 cells); guards allocations when
/// parsing untrusted input.
pub const MAX_RESOLUTION: u8 = 24;

/// Reverse the low `bits` bits of `x`.
#[inline]
pub(crate) fn bit_reverse(x: u64, bits: u8) -> u64 {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (64 - bits as u32)
    }
}

/// A step function on `[0,1]`, constant on cells `[i·2^-K, (i+1)·2^-K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicFunction {
    resolution: u8,
    values: Vec<f64>,
}

impl DyadicFunction {
    pub fn new(resolution: u8, values: Vec<f64>) -> Result<Self, Error> {
        if resolution > MAX_RESOLUTION {
            return Err(Error::ResolutionTooLarge(
                resolution as u32,
                MAX_RESOLUTION as u32,
            ));
        }
        if values.len() != 1usize << resolution {
            return Err(Error::LengthMismatch {
                resolution,
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(bad));
        }
        Ok(Self { resolution, values })
    }

    pub fn zero(resolution: u8) -> Self {
        Self::constant(resolution, 0.0)
    }

    pub fn constant(resolution: u8, c: f64) -> Self {
        Self {
            resolution,
            values: vec![c; 1 << resolution],
        }
    }

    /// The Walsh function `W_n` sampled at resolution `K`; requires `n < 2^K`.
    pub fn walsh(resolution: u8, n: u64) -> Result<Self, Error> {
        let len = 1u64 << resolution;
        if n >= len {
            return Err(Error::FrequencyTooHigh { n, resolution });
        }
        let values = (0..len)
            .map(|i| walsh_sign(n, i, resolution) as f64)
            .collect();
        Ok(Self { resolution, values })
    }

    /// Indicator of the union of the given cells.
    pub fn indicator_cells(resolution: u8, cells: &[usize]) -> Result<Self, Error> {
        let mut values = vec![0.0; 1 << resolution];
        for &c in cells {
            *values
                .get_mut(c)
                .ok_or_else(|| Error::Domain(format!("cell {c} out of range")))? = 1.0;
        }
        Self::new(resolution, values)
    }

    /// Indicator of `[a·2^-K, b·2^-K)`.
    pub fn indicator_range(resolution: u8, a: usize, b: usize) -> Result<Self, Error> {
        if a > b || b > (1 << resolution) {
            return Err(Error::Domain(format!("bad cell range {a}..{b}")));
        }
        let mut values = vec![0.0; 1 << resolution];
        for v in &mut values[a..b] {
            *v = 1.0;
        }
        Self::new(resolution, values)
    }

    pub fn resolution(&self) -> u8 {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize) -> f64 {
        self.values[cell]
    }

    pub fn cell_measure(&self) -> f64 {
        (self.values.len() as f64).recip()
    }

    /// `∫_0^1 f` — the mean of the cell values.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() / self.values.len() as f64
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `(∫ |f|^p)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        (self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() / self.values.len() as f64)
            .powf(p.recip())
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ f·g` for functions at a common resolution.
    pub fn inner(&self, other: &Self) -> Result<f64, Error> {
        if self.resolution != other.resolution {
            return Err(Error::ResolutionMismatch(self.resolution, other.resolution));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / self.values.len() as f64)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            resolution: self.resolution,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, Error> {
        if self.resolution != other.resolution {
            return Err(Error::ResolutionMismatch(self.resolution, other.resolution));
        }
        Ok(Self {
            resolution: self.resolution,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, Error> {
        self.add(&other.scale(-1.0))
    }

    pub fn abs(&self) -> Self {
        Self {
            resolution: self.resolution,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Re-sample at a finer resolution by repeating cell values.
    pub fn refine(&self, resolution: u8) -> Result<Self, Error> {
        if resolution < self.resolution {
            return Err(Error::ResolutionMismatch(self.resolution, resolution));
        }
        if resolution > MAX_RESOLUTION {
            return Err(Error::ResolutionTooLarge(
                resolution as u32,
                MAX_RESOLUTION as u32,
            ));
        }
        let rep = 1usize << (resolution - self.resolution);
        let mut values = Vec::with_capacity(1 << resolution);
        for v in &self.values {
            values.extend(std::iter::repeat(*v).take(rep));
        }
        Ok(Self { resolution, values })
    }

    /// True when every value is 0 or 1.
    pub fn is_indicator(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Measure of the support, meaningful for indicators.
    pub fn measure(&self) -> f64 {
        self.values.iter().filter(|&&v| v != 0.0).count() as f64 / self.values.len() as f64
    }

    pub fn support_cells(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Evaluate `W_n` on cell `cell` of the resolution-`K` grid.
///
/// `W_n = Π r_k^{ε_k}` over the binary digits `n = Σ ε_k 2^k`, with `r_k` the
/// Rademacher square wave of period `2^-k`, `+1` on the left half of each
/// period.  Digit `k` of `n` pairs with binary digit `k+1` of `x`, so the sign
/// is the parity of `popcount(n & bitrev_K(cell))`.
pub fn walsh_eval(n: u64, cell: u64, resolution: u8) -> Result<i32, Error> {
    let len = 1u64 << resolution;
    if n >= len {
        return Err(Error::FrequencyTooHigh { n, resolution });
    }
    if cell >= len {
        return Err(Error::Domain(format!("cell {cell} out of range")));
    }
    Ok(walsh_sign(n, cell, resolution))
}

#[inline]
pub(crate) fn walsh_sign(n: u64, cell: u64, resolution: u8) -> i32 {
    if (n & bit_reverse(cell, resolution)).count_ones() & 1 == 0 {
        1
    } else {
        -1
    }
}

/// Unnormalized in-place Walsh-Hadamard butterfly.
fn fwht_in_place(data: &mut [f64]) {
    let n = data.len();
    let mut h = 1;
    while h < n {
        let step = h * 2;
        let mut i = 0;
        while i < n {
            for j in i..i + h {
                let a = data[j];
                let b = data[j + h];
                data[j] = a + b;
                data[j + h] = a - b;
            }
            i += step;
        }
        h = step;
    }
}

/// Walsh-Paley coefficients `f̂(k) = ∫ f·W_k`, `0 ≤ k < 2^K`.
pub fn walsh_transform(f: &DyadicFunction) -> Vec<f64> {
    let k = f.resolution();
    let mut data = f.values().to_vec();
    fwht_in_place(&mut data);
    let scale = (data.len() as f64).recip();
    (0..data.len() as u64)
        .map(|n| data[bit_reverse(n, k) as usize] * scale)
        .collect()
}

/// Reconstruct a function from its Paley coefficients.
pub fn inverse_walsh_transform(resolution: u8, coeffs: &[f64]) -> Result<DyadicFunction, Error> {
    if coeffs.len() != 1usize << resolution {
        return Err(Error::LengthMismatch {
            resolution,
            got: coeffs.len(),
        });
    }
    let mut data: Vec<f64> = (0..coeffs.len() as u64)
        .map(|j| coeffs[bit_reverse(j, resolution) as usize])
        .collect();
    fwht_in_place(&mut data);
    DyadicFunction::new(resolution, data)
}

/// Half-open partial sum `S⁻_n f = Σ_{k<n} f̂(k) W_k`; the closed sum of the
/// classical notation is `partial_sum(f, n+1)`.
pub fn partial_sum(f: &DyadicFunction, n: u64) -> Result<DyadicFunction, Error> {
    let k = f.resolution();
    if n > 1u64 << k {
        return Err(Error::OrderTooLarge { n, resolution: k });
    }
    let mut coeffs = walsh_transform(f);
    for c in coeffs.iter_mut().skip(n as usize) {
        *c = 0.0;
    }
    inverse_walsh_transform(k, &coeffs)
}

/// Strictly increasing positive integers with ratio `inf n_{j+1}/n_j > 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LacunarySequence {
    terms: Vec<u64>,
    ratio: f64,
}

impl LacunarySequence {
    pub fn new(terms: Vec<u64>) -> Result<Self, Error> {
        if terms.is_empty() {
            return Err(Error::BadSequence("empty sequence".into()));
        }
        if terms[0] == 0 {
            return Err(Error::BadSequence("terms must be positive".into()));
        }
        let mut ratio = f64::INFINITY;
        for w in terms.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::BadSequence(format!(
                    "not strictly increasing at {} -> {}",
                    w[0], w[1]
                )));
            }
            ratio = ratio.min(w[1] as f64 / w[0] as f64);
        }
        if terms.len() == 1 {
            ratio = 2.0;
        }
        if ratio <= 1.0 {
            return Err(Error::BadSequence(format!("lacunarity ratio {ratio} <= 1")));
        }
        Ok(Self { terms, ratio })
    }

    /// `2, 4, …, 2^{K-1}` — the default experiment sequence at resolution `K`.
    pub fn powers_of_two(resolution: u8) -> Result<Self, Error> {
        if resolution < 2 {
            return Err(Error::BadSequence(
                "resolution too small for the default sequence".into(),
            ));
        }
        Self::new((1..resolution).map(|j| 1u64 << j).collect())
    }

    /// Geometric-like sequence `n_{j+1} = max(n_j+1, ceil(n_j·ratio))`,
    /// truncated to terms `< 2^resolution`.
    pub fn geometric(ratio: f64, first: u64, resolution: u8) -> Result<Self, Error> {
        if !(ratio > 1.0) {
            return Err(Error::BadSequence(format!("ratio {ratio} must exceed 1")));
        }
        if first == 0 {
            return Err(Error::BadSequence("first term must be positive".into()));
        }
        let cap = 1u64 << resolution;
        let mut terms = vec![first.max(1)];
        loop {
            let prev = *terms.last().unwrap();
            let next = ((prev as f64) * ratio).ceil() as u64;
            let next = next.max(prev + 1);
            if next >= cap {
                break;
            }
            terms.push(next);
        }
        Self::new(terms)
    }

    pub fn terms(&self) -> &[u64] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The lacunarity constant `α = min n_{j+1}/n_j`.
    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn max_term(&self) -> u64 {
        *self.terms.last().unwrap()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.terms.binary_search(&n).is_ok()
    }

    /// Check the sequence is representable at resolution `K` (all terms `< 2^K`).
    pub fn check_resolution(&self, resolution: u8) -> Result<(), Error> {
        if self.max_term() >= 1u64 << resolution {
            return Err(Error::BadSequence(format!(
                "term {} is not below 2^{resolution}",
                self.max_term()
            )));
        }
        Ok(())
    }
}

/// `sup_j |S⁻_{n_j} f|` together with the argmax linearization (ties resolved
/// to the smallest index).
pub fn lacunary_maximal(
    f: &DyadicFunction,
    seq: &LacunarySequence,
) -> Result<(DyadicFunction, ChoiceFunction), Error> {
    let k = f.resolution();
    if seq.max_term() > 1u64 << k {
        return Err(Error::OrderTooLarge {
            n: seq.max_term(),
            resolution: k,
        });
    }
    let coeffs = walsh_transform(f);
    let len = f.len();
    let mut best = vec![0.0f64; len];
    let mut arg = vec![seq.terms()[0]; len];
    let mut first = true;
    for &n in seq.terms() {
        let mut trunc = coeffs.clone();
        for c in trunc.iter_mut().skip(n as usize) {
            *c = 0.0;
        }
        let s = inverse_walsh_transform(k, &trunc)?;
        for (i, v) in s.values().iter().enumerate() {
            let a = v.abs();
            if first || a > best[i] {
                best[i] = a;
                arg[i] = n;
            }
        }
        first = false;
    }
    let maximal = DyadicFunction::new(k, best)?;
    let choice = ChoiceFunction::new(k, arg, seq)?;
    Ok((maximal, choice))
}

/// Dyadic Hardy-Littlewood maximal function: `Mf(x) = max` over dyadic
/// `I ∋ x`, `I ⊆ [0,1]`, of the mean of `|f|` on `I`.
pub fn dyadic_maximal(f: &DyadicFunction) -> DyadicFunction {
    let k = f.resolution() as usize;
    let len = f.len();
    let mut best: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    // level means, coarsening one scale at a time
    let mut level: Vec<f64> = best.clone();
    for s in (0..k).rev() {
        let half: Vec<f64> = (0..1 << s)
            .map(|j| (level[2 * j] + level[2 * j + 1]) / 2.0)
            .collect();
        for (i, b) in best.iter_mut().enumerate().take(len) {
            let m = half[i >> (k - s)];
            if m > *b {
                *b = m;
            }
        }
        level = half;
    }
    DyadicFunction::new(f.resolution(), best).expect("means of finite values are finite")
}

/// The non-increasing, equimeasurable profile of `|h|` on `(0,1]`.
#[derive(Debug, Clone)]
pub struct RearrangementCurve {
    resolution: u8,
    /// `|values|` sorted in non-increasing order.
    sorted: Vec<f64>,
}

impl RearrangementCurve {
    pub fn resolution(&self) -> u8 {
        self.resolution
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    /// Compressed `(t, value)` breakpoints: `value` holds on `(t_prev, t]`.
    pub fn breakpoints(&self) -> Vec<(f64, f64)> {
        let cell = (self.sorted.len() as f64).recip();
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &v) in self.sorted.iter().enumerate() {
            let t = (i + 1) as f64 * cell;
            match out.last_mut() {
                Some(last) if last.1 == v => last.0 = t,
                _ => out.push((t, v)),
            }
        }
        out
    }

    /// `h*(t) = inf{s ≥ 0 : |{|h| > s}| ≤ t}` for `t ∈ (0,1]`, clamped to the
    /// smallest cell value at `t = 1`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.sorted[0];
        }
        let n = self.sorted.len();
        let idx = ((t * n as f64).floor() as usize).min(n - 1);
        self.sorted[idx]
    }

    /// `∫_0^1 h*`, which rearrangement preserves: equals `∫ |h|`.
    pub fn integral(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    /// `|{h* > s}|`, for the equimeasurability check.
    pub fn distribution(&self, s: f64) -> f64 {
        self.sorted.iter().filter(|&&v| v > s).count() as f64 / self.sorted.len() as f64
    }
}

/// Decreasing rearrangement of `|f|`.
pub fn decreasing_rearrangement(f: &DyadicFunction) -> RearrangementCurve {
    let mut sorted: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    RearrangementCurve {
        resolution: f.resolution(),
        sorted,
    }
}

/// `‖f‖_{1,∞} = sup_{s>0} s·|{|f| > s}|`; exact for step functions (the sup
/// is attained approaching a value of `|f|` from below).
pub fn weak_l1_norm(f: &DyadicFunction) -> f64 {
    let curve = decreasing_rearrangement(f);
    let n = curve.sorted.len() as f64;
    curve
        .sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| v * (i + 1) as f64 / n)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: W_n as an explicit product of Rademacher signs
    /// read off the binary digits of the cell midpoint.
    fn walsh_oracle(n: u64, cell: u64, k: u8) -> i32 {
        let x = (cell as f64 + 0.5) / (1u64 << k) as f64;
        let mut sign = 1i32;
        for bit in 0..k {
            if n >> bit & 1 == 1 {
                // r_bit(x) = sign sin(2^{bit+1} π x)
                let v = (f64::powi(2.0, bit as i32 + 1) * std::f64::consts::PI * x).sin();
                sign *= if v > 0.0 { 1 } else { -1 };
            }
        }
        sign
    }

    #[test]
    fn walsh_eval_basics() {
        for k in 0..=4u8 {
            for cell in 0..1u64 << k {
                assert_eq!(walsh_eval(0, cell, k).unwrap(), 1);
            }
        }
        assert_eq!(walsh_eval(1, 0, 1).unwrap(), 1);
        assert_eq!(walsh_eval(1, 1, 1).unwrap(), -1);
        let signs: Vec<i32> = (0..4).map(|c| walsh_eval(3, c, 2).unwrap()).collect();
        assert_eq!(signs, vec![1, -1, -1, 1]);
        assert!(walsh_eval(4, 0, 2).is_err());
    }

    #[test]
    fn walsh_eval_matches_rademacher_product() {
        for k in 1..=6u8 {
            for n in 0..1u64 << k {
                for cell in 0..1u64 << k {
                    assert_eq!(
                        walsh_eval(n, cell, k).unwrap(),
                        walsh_oracle(n, cell, k),
                        "n={n} cell={cell} K={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn walsh_group_law() {
        let k = 6u8;
        for n in 0..1u64 << k {
            for m in [0u64, 1, 5, 17, 63] {
                for cell in 0..1u64 << k {
                    let lhs = walsh_sign(n, cell, k) * walsh_sign(m, cell, k);
                    assert_eq!(lhs, walsh_sign(n ^ m, cell, k));
                }
            }
        }
    }

    #[test]
    fn transform_of_half_indicator() {
        let f = DyadicFunction::new(1, vec![1.0, 0.0]).unwrap();
        let c = walsh_transform(&f);
        assert_eq!(c, vec![0.5, 0.5]);
    }

    #[test]
    fn transform_picks_out_walsh_mode() {
        let f = DyadicFunction::walsh(3, 5).unwrap();
        let c = walsh_transform(&f);
        for (k, v) in c.iter().enumerate() {
            let want = if k == 5 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "coefficient {k} = {v}");
        }
    }

    #[test]
    fn transform_round_trip_and_parseval() {
        let mut rng = crate::sampling::seeded_rng(7);
        for _ in 0..20 {
            let f = crate::sampling::random_function(&mut rng, 10);
            let c = walsh_transform(&f);
            let back = inverse_walsh_transform(10, &c).unwrap();
            for (a, b) in f.values().iter().zip(back.values()) {
                assert!((a - b).abs() < 1e-12);
            }
            let coeff_energy: f64 = c.iter().map(|v| v * v).sum();
            assert!((coeff_energy - f.l2_norm_sq()).abs() < 1e-12);
        }
    }

    #[test]
    fn orthonormality_small() {
        let k = 4u8;
        for m in 0..1u64 << k {
            let wm = DyadicFunction::walsh(k, m).unwrap();
            for n in 0..1u64 << k {
                let wn = DyadicFunction::walsh(k, n).unwrap();
                let ip = wm.inner(&wn).unwrap();
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((ip - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_sum_edges() {
        let mut rng = crate::sampling::seeded_rng(3);
        let f = crate::sampling::random_function(&mut rng, 5);
        let s0 = partial_sum(&f, 0).unwrap();
        assert!(s0.sup_norm() == 0.0);
        let full = partial_sum(&f, 32).unwrap();
        for (a, b) in f.values().iter().zip(full.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(partial_sum(&f, 33).is_err());
    }

    #[test]
    fn partial_sum_on_walsh_mode() {
        let f = DyadicFunction::walsh(3, 5).unwrap();
        let s6 = partial_sum(&f, 6).unwrap();
        for (a, b) in s6.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
        let s5 = partial_sum(&f, 5).unwrap();
        assert!(s5.sup_norm() < 1e-12);
    }

    #[test]
    fn martingale_property() {
        // S⁻_{2^k} equals the conditional expectation on cells of length 2^-k,
        // checked against a brute-force cell average.
        let mut rng = crate::sampling::seeded_rng(11);
        let f = crate::sampling::random_function(&mut rng, 7);
        for k in 0..=7u8 {
            let s = partial_sum(&f, 1 << k).unwrap();
            let cells_per = 1usize << (7 - k);
            for block in 0..1usize << k {
                let avg: f64 = f.values()[block * cells_per..(block + 1) * cells_per]
                    .iter()
                    .sum::<f64>()
                    / cells_per as f64;
                for i in block * cells_per..(block + 1) * cells_per {
                    assert!((s.value(i) - avg).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lacunary_maximal_examples() {
        let seq = LacunarySequence::new(vec![2, 4, 8]).unwrap();
        let f = DyadicFunction::walsh(4, 0).unwrap();
        let (m, _) = lacunary_maximal(&f, &seq).unwrap();
        for v in m.values() {
            assert!((v - 1.0).abs() < 1e-12);
        }

        let seq = LacunarySequence::new(vec![2, 8]).unwrap();
        let f = DyadicFunction::walsh(4, 3).unwrap();
        let (m, choice) = lacunary_maximal(&f, &seq).unwrap();
        for v in m.values() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        // S⁻_2 W_3 = 0, so the argmax is 8 everywhere.
        assert!(choice.assignment().iter().all(|&n| n == 8));
    }

    #[test]
    fn dyadic_maximal_examples() {
        let f = DyadicFunction::constant(5, -3.0);
        let m = dyadic_maximal(&f);
        for v in m.values() {
            assert_eq!(*v, 3.0);
        }

        let f = DyadicFunction::indicator_range(2, 0, 1).unwrap();
        let m = dyadic_maximal(&f);
        assert_eq!(m.values(), &[1.0, 0.5, 0.25, 0.25]);
    }

    #[test]
    fn dyadic_maximal_weak_bound_exhaustive() {
        // |{M 1_F > λ}| ≤ |F|/λ for every dyadic F at K=6 on a λ grid.
        let k = 6u8;
        let len = 1usize << k;
        let mut rng = crate::sampling::seeded_rng(5);
        for trial in 0..200 {
            let f = if trial < 64 {
                DyadicFunction::indicator_range(k, 0, trial % len + 1).unwrap()
            } else {
                crate::sampling::random_indicator(&mut rng, k, 0.3)
            };
            let m = dyadic_maximal(&f);
            let fm = f.measure();
            for step in 1..20 {
                let lambda = step as f64 / 20.0;
                let above = m.values().iter().filter(|&&v| v > lambda).count() as f64
                    / len as f64;
                assert!(above <= fm / lambda + 1e-12);
            }
        }
    }

    #[test]
    fn rearrangement_examples() {
        let f = DyadicFunction::new(2, vec![3.0, 1.0, 1.0, 1.0]).unwrap();
        let curve = decreasing_rearrangement(&f);
        assert_eq!(curve.breakpoints(), vec![(0.25, 3.0), (1.0, 1.0)]);
        assert!((curve.eval(0.1) - 3.0).abs() < 1e-15);
        assert!((curve.eval(0.3) - 1.0).abs() < 1e-15);
        assert!((curve.integral() - f.l1_norm()).abs() < 1e-12);

        // equimeasurability
        for s in [0.0, 0.5, 1.0, 2.0, 3.0] {
            let direct =
                f.values().iter().filter(|&&v| v.abs() > s).count() as f64 / f.len() as f64;
            assert_eq!(curve.distribution(s), direct);
        }

        let neg = f.scale(-1.0);
        let curve_neg = decreasing_rearrangement(&neg);
        assert_eq!(curve.sorted_values(), curve_neg.sorted_values());
    }

    #[test]
    fn weak_l1_examples() {
        let f = DyadicFunction::indicator_range(4, 0, 5).unwrap().scale(2.0);
        assert!((weak_l1_norm(&f) - 2.0 * 5.0 / 16.0).abs() < 1e-15);

        let f = DyadicFunction::new(2, vec![3.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((weak_l1_norm(&f) - 1.0).abs() < 1e-15);

        let mut rng = crate::sampling::seeded_rng(9);
        for _ in 0..50 {
            let f = crate::sampling::random_function(&mut rng, 6);
            assert!(weak_l1_norm(&f) <= f.l1_norm() + 1e-12);
        }
    }

    #[test]
    fn lacunary_sequence_validation() {
        assert!(LacunarySequence::new(vec![]).is_err());
        assert!(LacunarySequence::new(vec![0, 1]).is_err());
        assert!(LacunarySequence::new(vec![2, 2]).is_err());
        assert!(LacunarySequence::new(vec![4, 3]).is_err());
        let s = LacunarySequence::new(vec![2, 4, 8, 16]).unwrap();
        assert_eq!(s.ratio(), 2.0);
        let s = LacunarySequence::new(vec![4, 5, 6]).unwrap();
        assert_eq!(s.ratio(), 1.2);
        let s = LacunarySequence::powers_of_two(6).unwrap();
        assert_eq!(s.terms(), &[2, 4, 8, 16, 32]);
    }
}
