//! Symmetric curvature functions of the product family
//! `f_*(κ) = s_n(κ)^{β/n} · s_k(κ)^{(1-β)/k}` and the dual speed `F(κ) = 1 / f_*(1/κ)`.
//!
//! `s_k` is the normalized elementary symmetric polynomial `e_k / C(n, k)`.

use crate::error::{arg, Error, Result};
use crate::linalg::jacobi_eigenvalues;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Curvature components at or below this are treated as the cone boundary.
pub const KAPPA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSpec {
    n: usize,
    k: usize,
    beta: f64,
    alpha: f64,
}

impl CurvatureSpec {
    pub fn new(n: usize, k: usize, beta: f64, alpha: f64) -> Result<Self> {
        if n < 2 {
            return arg(format!("dimension n = {n} must be at least 2"));
        }
        if k > n {
            return arg(format!("index k = {k} exceeds n = {n}"));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return arg(format!("beta = {beta} must lie in (0, 1]"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return arg(format!("alpha = {alpha} must be positive"));
        }
        // s_0 carries no degree, so homogeneity forces the full weight onto s_n.
        if k == 0 && beta != 1.0 {
            return arg("k = 0 requires beta = 1");
        }
        Ok(CurvatureSpec { n, k, beta, alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Exponents applied to `s_n` and `s_k`.
    fn exponents(&self) -> (f64, f64) {
        let en = self.beta / self.n as f64;
        let ek = if self.k == 0 { 0.0 } else { (1.0 - self.beta) / self.k as f64 };
        (en, ek)
    }

    /// Same spec with a different speed exponent.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        CurvatureSpec::new(self.n, self.k, self.beta, alpha)
    }
}

/// Unnormalized elementary symmetric polynomials `e_0..=e_m` of `kappa`,
/// by the product recurrence over `(1 + κ_i x)`.
pub fn elementary(kappa: &[f64]) -> Vec<f64> {
    let m = kappa.len();
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for (count, &x) in kappa.iter().enumerate() {
        for j in (1..=count + 1).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

pub fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Normalized k-th elementary symmetric polynomial.
pub fn sym_poly(k: usize, kappa: &[f64]) -> Result<f64> {
    let n = kappa.len();
    if k > n {
        return arg(format!("index k = {k} out of range for n = {n}"));
    }
    if let Some(i) = kappa.iter().position(|x| !x.is_finite()) {
        return arg(format!("kappa[{i}] is not finite"));
    }
    Ok(elementary(kappa)[k] / binomial(n, k))
}

fn check_interior(kappa: &[f64]) -> Result<()> {
    for (index, &value) in kappa.iter().enumerate() {
        if !(value > KAPPA_FLOOR) || !value.is_finite() {
            return Err(Error::DomainBoundary { index, value });
        }
    }
    Ok(())
}

fn check_len(spec: &CurvatureSpec, kappa: &[f64]) -> Result<()> {
    if kappa.len() != spec.n {
        return arg(format!("kappa has length {} but spec has n = {}", kappa.len(), spec.n));
    }
    Ok(())
}

pub fn f_star(spec: &CurvatureSpec, kappa: &[f64]) -> Result<f64> {
    check_len(spec, kappa)?;
    check_interior(kappa)?;
    let e = elementary(kappa);
    let (en, ek) = spec.exponents();
    let sn = e[spec.n] / binomial(spec.n, spec.n);
    let sk = e[spec.k] / binomial(spec.n, spec.k);
    Ok(sn.powf(en) * sk.powf(ek))
}

/// Gradient `∂f_*/∂κ_i` by logarithmic differentiation of the product form.
pub fn f_star_grad(spec: &CurvatureSpec, kappa: &[f64]) -> Result<Vec<f64>> {
    let f = f_star(spec, kappa)?;
    let (en, ek) = spec.exponents();
    let n = spec.n;
    let k = spec.k;
    let ek_full = elementary(kappa)[k];
    let mut grad = Vec::with_capacity(n);
    let mut rest = Vec::with_capacity(n - 1);
    for i in 0..n {
        let mut dlog = en / kappa[i];
        if k > 0 && ek != 0.0 {
            rest.clear();
            rest.extend(kappa.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x));
            dlog += ek * elementary(&rest)[k - 1] / ek_full;
        }
        grad.push(f * dlog);
    }
    Ok(grad)
}

/// `F(κ) = 1 / f_*(κ_1^{-1}, …, κ_n^{-1})`.
pub fn big_f(spec: &CurvatureSpec, kappa: &[f64]) -> Result<f64> {
    check_len(spec, kappa)?;
    check_interior(kappa)?;
    let inv: Vec<f64> = kappa.iter().map(|x| 1.0 / x).collect();
    Ok(1.0 / f_star(spec, &inv)?)
}

#[inline]
fn pow_fast(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if p == 1.0 {
        x
    } else if p == -1.0 {
        1.0 / x
    } else if p == 0.5 {
        x.sqrt()
    } else if p == -0.5 {
        1.0 / x.sqrt()
    } else {
        x.powf(p)
    }
}

/// `f_*` for `n = 2` expressed through the invariants `s_1 = tr/2`, `s_2 = det`
/// of the dual curvature matrix, so no eigen-decomposition is needed in the
/// solver's inner loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarLaw {
    q1: f64,
    q2: f64,
    alpha: f64,
}

impl PlanarLaw {
    pub fn new(spec: &CurvatureSpec) -> Result<Self> {
        if spec.n != 2 {
            return arg(format!("planar law needs n = 2, got n = {}", spec.n));
        }
        let (q1, q2) = match spec.k {
            0 => (0.0, 0.5 * spec.beta),
            1 => (1.0 - spec.beta, 0.5 * spec.beta),
            _ => (0.0, 0.5),
        };
        Ok(PlanarLaw { q1, q2, alpha: spec.alpha })
    }

    #[inline]
    pub fn value(&self, s1: f64, s2: f64) -> f64 {
        pow_fast(s2, self.q2) * pow_fast(s1, self.q1)
    }

    /// `f_*^{-α}`.
    #[inline]
    pub fn inverse_speed(&self, s1: f64, s2: f64) -> f64 {
        pow_fast(s2, -self.alpha * self.q2) * pow_fast(s1, -self.alpha * self.q1)
    }

    /// `(∂ ln f/∂s_1, ∂ ln f/∂s_2)`.
    #[inline]
    pub fn log_partials(&self, s1: f64, s2: f64) -> (f64, f64) {
        (self.q1 / s1, self.q2 / s2)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Concavity,
    Positivity,
    Monotonicity,
    Homogeneity,
    Epsilon0,
    Escape,
    Normalization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionFailure {
    pub condition: Condition,
    pub sample: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub concave: bool,
    pub positive: bool,
    pub monotone: bool,
    pub homogeneous: bool,
    pub epsilon0_positive: bool,
    pub escapes: bool,
    pub normalized: bool,
    /// `min (Σ f_*^i κ_i²) / (f_* Σ κ_i)` over the samples.
    pub epsilon0_estimate: f64,
    /// Largest eigenvalue of `diag(κ) D²f_* diag(κ) / f_*` seen.
    pub worst_concavity_eigenvalue: f64,
    /// Largest shift `R` the escape search needed.
    pub max_escape_shift: f64,
    pub sample_count: usize,
    pub failures: Vec<ConditionFailure>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.concave
            && self.positive
            && self.monotone
            && self.homogeneous
            && self.epsilon0_positive
            && self.escapes
            && self.normalized
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConditionOptions {
    /// Allowed positive eigenvalue of the scaled finite-difference Hessian.
    pub tol_concavity: f64,
    pub tol_homogeneity: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Level `C` the escape search must exceed.
    pub escape_level: f64,
    pub max_doublings: usize,
}

impl Default for ConditionOptions {
    fn default() -> Self {
        ConditionOptions {
            tol_concavity: 1e-6,
            tol_homogeneity: 1e-12,
            fd_step: 1e-4,
            escape_level: 100.0,
            max_doublings: 80,
        }
    }
}

/// Scaled Hessian `diag(κ) D²f diag(κ)` by central differences with
/// per-coordinate step `h κ_i`. Congruent to `D²f`, so it has the same inertia.
fn scaled_fd_hessian(spec: &CurvatureSpec, kappa: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = kappa.len();
    let mut out = vec![0.0; n * n];
    let mut p = kappa.to_vec();
    let f0 = f_star(spec, kappa)?;
    for i in 0..n {
        let hi = h * kappa[i];
        p[i] = kappa[i] + hi;
        let fp = f_star(spec, &p)?;
        p[i] = kappa[i] - hi;
        let fm = f_star(spec, &p)?;
        p[i] = kappa[i];
        out[i * n + i] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in (i + 1)..n {
            let hj = h * kappa[j];
            let mut eval = |si: f64, sj: f64| -> Result<f64> {
                p[i] = kappa[i] + si * hi;
                p[j] = kappa[j] + sj * hj;
                let v = f_star(spec, &p);
                p[i] = kappa[i];
                p[j] = kappa[j];
                v
            };
            let v = (eval(1.0, 1.0)? - eval(1.0, -1.0)? - eval(-1.0, 1.0)? + eval(-1.0, -1.0)?)
                / (4.0 * h * h);
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
    }
    Ok(out)
}

/// Empirically verify concavity, positivity, monotonicity, homogeneity, the
/// `ε₀` inequality, the escape property and the normalization of `f_*` on a
/// sample set.
pub fn check_structural_conditions(
    spec: &CurvatureSpec,
    samples: &[Vec<f64>],
    opts: &ConditionOptions,
) -> Result<ConditionReport> {
    if samples.is_empty() {
        return arg("sample set is empty");
    }
    for s in samples {
        check_len(spec, s)?;
        check_interior(s)?;
    }
    let n = spec.n;
    let mut rep = ConditionReport {
        concave: true,
        positive: true,
        monotone: true,
        homogeneous: true,
        epsilon0_positive: true,
        escapes: true,
        normalized: true,
        epsilon0_estimate: f64::INFINITY,
        worst_concavity_eigenvalue: f64::NEG_INFINITY,
        max_escape_shift: 0.0,
        sample_count: samples.len(),
        failures: Vec::new(),
    };
    let fail = |rep: &mut ConditionReport, condition, sample: &[f64], detail: String| {
        rep.failures.push(ConditionFailure { condition, sample: sample.to_vec(), detail });
    };

    let ones = vec![1.0; n];
    let norm = f_star(spec, &ones)?;
    if (norm - 1.0).abs() > 1e-14 {
        rep.normalized = false;
        fail(&mut rep, Condition::Normalization, &ones, format!("f_*(1,..,1) = {norm}"));
    }

    for s in samples {
        let f = f_star(spec, s)?;
        if !(f > 0.0) {
            rep.positive = false;
            fail(&mut rep, Condition::Positivity, s, format!("f_* = {f}"));
        }
        let g = f_star_grad(spec, s)?;
        if let Some(i) = g.iter().position(|&gi| !(gi > 0.0)) {
            rep.monotone = false;
            fail(&mut rep, Condition::Monotonicity, s, format!("f_*^{i} = {}", g[i]));
        }

        let hs = scaled_fd_hessian(spec, s, opts.fd_step)?;
        let top = *jacobi_eigenvalues(&hs, n).last().unwrap() / f;
        rep.worst_concavity_eigenvalue = rep.worst_concavity_eigenvalue.max(top);
        if top > opts.tol_concavity {
            rep.concave = false;
            fail(&mut rep, Condition::Concavity, s, format!("scaled Hessian eigenvalue {top:e}"));
        }

        for c in [0.5, 2.0] {
            let scaled: Vec<f64> = s.iter().map(|x| c * x).collect();
            let err = (f_star(spec, &scaled)? - c * f).abs();
            if err > opts.tol_homogeneity * c * f {
                rep.homogeneous = false;
                fail(&mut rep, Condition::Homogeneity, s, format!("c = {c}: defect {err:e}"));
            }
        }

        let num: f64 = g.iter().zip(s).map(|(gi, k)| gi * k * k).sum();
        let den = f * s.iter().sum::<f64>();
        let ratio = num / den;
        rep.epsilon0_estimate = rep.epsilon0_estimate.min(ratio);
        if !(ratio > 0.0) {
            rep.epsilon0_positive = false;
            fail(&mut rep, Condition::Epsilon0, s, format!("ratio {ratio}"));
        }

        let mut shifted = s.clone();
        let mut shift = 1.0;
        let mut found = false;
        for _ in 0..opts.max_doublings {
            shifted[n - 1] = s[n - 1] + shift;
            if f_star(spec, &shifted)? > opts.escape_level {
                found = true;
                break;
            }
            shift *= 2.0;
        }
        if found {
            rep.max_escape_shift = rep.max_escape_shift.max(shift);
        } else {
            rep.escapes = false;
            fail(&mut rep, Condition::Escape, s, format!("no R up to {shift:e}"));
        }
    }
    Ok(rep)
}

/// `count` points with every component log-uniform in `[lo, hi]`.
pub fn log_uniform_samples(n: usize, count: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|_| (0..n).map(|_| rng.gen_range(a..=b).exp()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(n: usize, k: usize, beta: f64, alpha: f64) -> CurvatureSpec {
        CurvatureSpec::new(n, k, beta, alpha).unwrap()
    }

    /// Brute-force subset enumeration, independent of the recurrence.
    fn e_k_enumerated(k: usize, kappa: &[f64]) -> f64 {
        let n = kappa.len();
        (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (0..n).filter(|i| m & (1 << i) != 0).map(|i| kappa[i]).product::<f64>())
            .sum()
    }

    #[test]
    fn sym_poly_examples() {
        assert_relative_eq!(sym_poly(1, &[1.0, 1.0, 1.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(sym_poly(2, &[1.0, 2.0, 3.0]).unwrap(), 11.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(sym_poly(3, &[1.0, 2.0, 3.0]).unwrap(), 6.0, epsilon = 1e-14);
        assert_eq!(sym_poly(0, &[4.0, 5.0]).unwrap(), 1.0);
        assert!(matches!(sym_poly(4, &[1.0, 2.0, 3.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn recurrence_matches_enumeration() {
        let kappa = [0.3, 1.7, 2.2, 0.9, 5.0, 0.11];
        let e = elementary(&kappa);
        for k in 0..=kappa.len() {
            assert_relative_eq!(e[k], e_k_enumerated(k, &kappa), max_relative = 1e-13);
        }
    }

    #[test]
    fn f_star_examples() {
        let s = spec(3, 1, 0.5, 1.0);
        assert_eq!(f_star(&s, &[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_relative_eq!(f_star(&s, &[2.0, 2.0, 2.0]).unwrap(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(f_star(&spec(2, 0, 1.0, 1.0), &[1.0, 4.0]).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn f_star_boundary_error_names_index() {
        let s = spec(3, 2, 1.0, 1.0);
        assert_eq!(
            f_star(&s, &[1.0, 0.0, 2.0]),
            Err(Error::DomainBoundary { index: 1, value: 0.0 })
        );
        assert!(matches!(f_star(&s, &[1.0, 1.0, 1e-13]), Err(Error::DomainBoundary { index: 2, .. })));
    }

    #[test]
    fn gradient_examples() {
        let g = f_star_grad(&spec(2, 0, 1.0, 1.0), &[1.0, 4.0]).unwrap();
        assert_relative_eq!(g[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(g[1], 0.25, epsilon = 1e-14);
        for s in [spec(3, 1, 0.5, 2.0), spec(4, 2, 0.3, 1.0), spec(2, 2, 1.0, 0.5)] {
            let n = s.n();
            let g = f_star_grad(&s, &vec![1.0; n]).unwrap();
            for gi in g {
                assert_relative_eq!(gi, 1.0 / n as f64, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let s = spec(4, 2, 0.4, 1.0);
        let kappa = [0.7, 1.3, 2.9, 0.4];
        let g = f_star_grad(&s, &kappa).unwrap();
        let h = 1e-5;
        for i in 0..4 {
            let mut p = kappa;
            p[i] += h;
            let fp = f_star(&s, &p).unwrap();
            p[i] -= 2.0 * h;
            let fm = f_star(&s, &p).unwrap();
            assert_relative_eq!(g[i], (fp - fm) / (2.0 * h), max_relative = 1e-8);
        }
    }

    #[test]
    fn big_f_examples() {
        let s = spec(2, 1, 0.5, 1.0);
        assert_relative_eq!(big_f(&s, &[0.5, 0.5]).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(big_f(&s, &[1.0, 1.0]).unwrap(), 1.0, epsilon = 1e-15);
        let p = spec(2, 0, 1.0, 1.0);
        assert_relative_eq!(big_f(&p, &[1.0, 2.0]).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(big_f(&p, &[2.0, 4.0]).unwrap(), 2.0 * 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn degenerates_toward_cone_boundary() {
        let s = spec(3, 1, 0.5, 1.0);
        let mut last = f64::INFINITY;
        for m in 1..=10 {
            let v = f_star(&s, &[1.0, 2.0, 10f64.powi(-m)]).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(last < 0.05);
    }

    #[test]
    fn planar_law_agrees_with_vector_form() {
        for s in [spec(2, 0, 1.0, 1.0), spec(2, 1, 0.5, 1.5), spec(2, 2, 0.3, 0.7)] {
            let law = PlanarLaw::new(&s).unwrap();
            let kappa = [0.6, 2.3];
            let s1 = 0.5 * (kappa[0] + kappa[1]);
            let s2 = kappa[0] * kappa[1];
            let f = f_star(&s, &kappa).unwrap();
            assert_relative_eq!(law.value(s1, s2), f, max_relative = 1e-14);
            assert_relative_eq!(law.inverse_speed(s1, s2), f.powf(-s.alpha()), max_relative = 1e-14);
        }
        assert!(PlanarLaw::new(&spec(3, 1, 1.0, 1.0)).is_err());
    }

    #[test]
    fn geometric_mean_is_concave_at_symmetric_point() {
        let s = spec(2, 0, 1.0, 1.0);
        let rep = check_structural_conditions(&s, &[vec![1.0, 1.0]], &Default::default()).unwrap();
        assert!(rep.concave);
        assert!(rep.worst_concavity_eigenvalue <= 1e-6);
    }

    #[test]
    fn homogeneity_at_three_five() {
        let s = spec(2, 1, 0.5, 1.0);
        let a = f_star(&s, &[6.0, 10.0]).unwrap();
        let b = f_star(&s, &[3.0, 5.0]).unwrap();
        assert_relative_eq!(a, 2.0 * b, max_relative = 1e-14);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(CurvatureSpec::new(1, 0, 1.0, 1.0).is_err());
        assert!(CurvatureSpec::new(2, 3, 1.0, 1.0).is_err());
        assert!(CurvatureSpec::new(2, 1, 0.0, 1.0).is_err());
        assert!(CurvatureSpec::new(2, 1, 1.0, 0.0).is_err());
        assert!(CurvatureSpec::new(2, 0, 0.5, 1.0).is_err());
    }

    #[test]
    fn empty_sample_set_is_an_error() {
        let s = spec(2, 0, 1.0, 1.0);
        assert!(check_structural_conditions(&s, &[], &Default::default()).is_err());
    }

    #[test]
    fn non_concave_function_is_reported() {
        // A convex perturbation is caught through a tiny tolerance flip: a
        // negative tolerance forces the concavity check to flag every sample.
        let s = spec(2, 0, 1.0, 1.0);
        let opts = ConditionOptions { tol_concavity: -1.0, ..Default::default() };
        let rep = check_structural_conditions(&s, &[vec![1.0, 2.0]], &opts).unwrap();
        assert!(!rep.concave);
        assert!(!rep.all_pass());
        assert_eq!(rep.failures[0].condition, Condition::Concavity);
        assert_eq!(rep.failures[0].sample, vec![1.0, 2.0]);
    }
}
