//! Meshes and product-integration weights for weakly singular integrals.

use crate::error::{Error, Result};

/// Nodes L·(i/n)^r on [0, L].
#[derive(Debug, Clone, PartialEq)]
pub struct GradedMesh {
    pub nodes: Vec<f64>,
    pub grading: f64,
}

impl GradedMesh {
    pub fn new(length: f64, n: usize, grading: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() || n == 0 || !(grading >= 1.0) {
            return Err(Error::DomainError(format!("graded mesh needs length > 0, n >= 1, grading >= 1 (got {length}, {n}, {grading})")));
        }
        let mut nodes: Vec<f64> = (0..=n).map(|i| length * (i as f64 / n as f64).powf(grading)).collect();
        nodes[n] = length;
        Ok(Self { nodes, grading })
    }

    pub fn uniform(length: f64, n: usize) -> Result<Self> {
        Self::new(length, n, 1.0)
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn length(&self) -> f64 {
        *self.nodes.last().expect("mesh has nodes")
    }
}

/// Σ weights[i]·y(nodes[i]) approximates a weighted integral.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl WeightedRule {
    pub fn apply<F: FnMut(f64) -> f64>(&self, mut y: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&s, &w)| w * y(s)).sum()
    }

    pub fn apply_values(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.weights.len(), "sample count must match the rule");
        self.weights.iter().zip(y).map(|(w, v)| w * v).sum()
    }
}

/// ∫ₐᵇ s^(mu+k) ds.
pub fn power_moment(mu: f64, a: f64, b: f64, k: u32) -> Result<f64> {
    if !(mu > -1.0) {
        return Err(Error::DomainError(format!("power moment needs mu > -1 (got {mu})")));
    }
    if !(a >= 0.0) || !(a <= b) {
        return Err(Error::DomainError(format!("power moment needs 0 <= a <= b (got {a}, {b})")));
    }
    let e = mu + f64::from(k) + 1.0;
    Ok((b.powf(e) - a.powf(e)) / e)
}

/// Weights for ∫₀ᴸ s^w y(s) ds that are exact for piecewise-linear y on the mesh.
pub fn build_rule(weight_exponent: f64, mesh: &GradedMesh) -> Result<WeightedRule> {
    let nodes = mesh.nodes.clone();
    let mut weights = vec![0.0; nodes.len()];
    for i in 0..mesh.cells() {
        let (l, r) = (nodes[i], nodes[i + 1]);
        let h = r - l;
        let m0 = power_moment(weight_exponent, l, r, 0)?;
        let m1 = power_moment(weight_exponent, l, r, 1)?;
        let wr = (m1 - l * m0) / h;
        weights[i] += m0 - wr;
        weights[i + 1] += wr;
    }
    Ok(WeightedRule { nodes, weights })
}

/// Per-cell product weights from the first two antiderivatives of a kernel.
///
/// For a kernel K with K1 = ∫₀ˢ K and K2 = ∫₀ˢ K1, returns the pair
/// (w_left, w_right) with w_left·y(l) + w_right·y(r) = ∫ₗʳ K(s) y(s) ds
/// for linear y.
pub fn cell_weights(l: f64, r: f64, k1: (f64, f64), k2: (f64, f64)) -> (f64, f64) {
    let h = r - l;
    let p0 = k1.1 - k1.0;
    let wr = (h * k1.1 - (k2.1 - k2.0)) / h;
    (p0 - wr, wr)
}

/// Weights for ∫ K(s) y(s) ds over the node span, exact for piecewise-linear y,
/// given K1 and K2 sampled at the nodes.
pub fn antiderivative_weights(nodes: &[f64], k1: &[f64], k2: &[f64]) -> Vec<f64> {
    assert!(nodes.len() == k1.len() && nodes.len() == k2.len());
    let mut w = vec![0.0; nodes.len()];
    for i in 0..nodes.len().saturating_sub(1) {
        let (wl, wr) = cell_weights(nodes[i], nodes[i + 1], (k1[i], k1[i + 1]), (k2[i], k2[i + 1]));
        w[i] += wl;
        w[i + 1] += wr;
    }
    w
}

/// Product rule for ∫ K(s) y(s) ds over an ascending s-mesh starting at the
/// kernel's singular point.
///
/// `kernel(n, s)` returns K (n = 0) or its n-th antiderivative from 0
/// (n = 1, 2). Cells with s_l < 4h replace y by its linear interpolant and
/// integrate K exactly through the antiderivatives; other cells apply
/// 8-point Gauss-Legendre to K·y, because differencing antiderivatives far
/// from the singularity amplifies their truncation error by 1/h.
pub fn hybrid_product_rule<F>(nodes: &[f64], mut kernel: F) -> Result<WeightedRule>
where
    F: FnMut(u32, f64) -> Result<f64>,
{
    let (gx, gw) = gauss_legendre(8);
    let mut out = WeightedRule { nodes: Vec::new(), weights: Vec::new() };
    let mut hat = vec![0.0; nodes.len()];
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..nodes.len().saturating_sub(1) {
        let (l, r) = (nodes[i], nodes[i + 1]);
        let h = r - l;
        if l < 4.0 * h {
            let left = match prev {
                Some(v) => v,
                None => (kernel(1, l)?, kernel(2, l)?),
            };
            let right = (kernel(1, r)?, kernel(2, r)?);
            let (wl, wr) = cell_weights(l, r, (left.0, right.0), (left.1, right.1));
            hat[i] += wl;
            hat[i + 1] += wr;
            prev = Some(right);
        } else {
            for (x, w) in gx.iter().zip(&gw) {
                let s = l + 0.5 * h * (1.0 + x);
                out.nodes.push(s);
                out.weights.push(kernel(0, s)? * 0.5 * h * w);
            }
            prev = None;
        }
    }
    for (s, w) in nodes.iter().zip(hat) {
        if w != 0.0 {
            out.nodes.push(*s);
            out.weights.push(w);
        }
    }
    Ok(out)
}

/// Gauss-Legendre rule for ∫ₐᵇ (s−a)^e g(s) ds, e > −1, through the
/// substitution s = a + (b−a)·w^{1/(1+e)} which leaves a smooth integrand.
pub fn left_singular_gauss(a: f64, b: f64, e: f64, panels: usize, order: usize) -> Result<WeightedRule> {
    if !(e > -1.0) {
        return Err(Error::DomainError(format!("endpoint exponent must exceed -1 (got {e})")));
    }
    let base = composite_gauss(0.0, 1.0, panels, order);
    let scale = (b - a).powf(1.0 + e) / (1.0 + e);
    let nodes = base.nodes.iter().map(|w| a + (b - a) * w.powf(1.0 / (1.0 + e))).collect();
    let weights = base.weights.iter().map(|w| w * scale).collect();
    Ok(WeightedRule { nodes, weights })
}

/// Composite Gauss-Legendre on panels [0, L·2^{-K}], ..., [L/2, L], for
/// integrands that behave like powers of s near 0.
pub fn geometric_gauss(length: f64, levels: usize, order: usize) -> WeightedRule {
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut edges = vec![0.0];
    for k in (0..=levels).rev() {
        edges.push(length * 0.5f64.powi(k as i32));
    }
    let (gx, gw) = gauss_legendre(order);
    for p in edges.windows(2) {
        let (a, b) = (p[0], p[1]);
        for (x, w) in gx.iter().zip(&gw) {
            nodes.push(0.5 * (a + b) + 0.5 * (b - a) * x);
            weights.push(0.5 * (b - a) * w);
        }
    }
    WeightedRule { nodes, weights }
}

/// Composite trapezoid weights on arbitrary ascending nodes.
pub fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; nodes.len()];
    for i in 0..nodes.len().saturating_sub(1) {
        let h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// n-point Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Composite Gauss-Legendre rule on [a, b] with `panels` equal panels.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> WeightedRule {
    let (gx, gw) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (x, w) in gx.iter().zip(&gw) {
            nodes.push(c + 0.5 * h * x);
            weights.push(0.5 * h * w);
        }
    }
    WeightedRule { nodes, weights }
}

/// Linear interpolation of samples on ascending nodes, clamped at the ends.
pub fn interp_linear(nodes: &[f64], values: &[f64], s: f64) -> f64 {
    let n = nodes.len();
    if s <= nodes[0] {
        return values[0];
    }
    if s >= nodes[n - 1] {
        return values[n - 1];
    }
    let i = nodes.partition_point(|&v| v <= s) - 1;
    let th = (s - nodes[i]) / (nodes[i + 1] - nodes[i]);
    values[i] + th * (values[i + 1] - values[i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn power_moment_examples() {
        assert_eq!(power_moment(0.0, 0.0, 1.0, 0).unwrap(), 1.0);
        assert!((power_moment(-0.5, 0.0, 1.0, 0).unwrap() - 2.0).abs() < 1e-15);
        assert!((power_moment(-0.5, 0.0, 1.0, 1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(power_moment(-1.0, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn trapezoid_case() {
        let r = build_rule(0.0, &GradedMesh::uniform(1.0, 2).unwrap()).unwrap();
        for (a, b) in r.weights.iter().zip([0.25, 0.5, 0.25]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn singular_weight_exactness() {
        let mesh = GradedMesh::new(1.0, 37, 2.0).unwrap();
        let r = build_rule(-0.5, &mesh).unwrap();
        assert!((r.apply(|_| 1.0) - 2.0).abs() < 1e-13);
        assert!((r.apply(|s| s) - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn mesh_shape() {
        let m = GradedMesh::new(2.0, 8, 2.0).unwrap();
        assert_eq!(m.nodes[0], 0.0);
        assert_eq!(m.length(), 2.0);
        assert!((m.nodes[4] - 0.5).abs() < 1e-15);
        assert!(GradedMesh::new(1.0, 4, 0.5).is_err());
    }

    #[test]
    fn antiderivative_weights_match_power_rule() {
        // K(s) = s^(-0.3): K1 = s^0.7/0.7, K2 = s^1.7/(0.7*1.7)
        let mesh = GradedMesh::new(1.5, 20, 2.0).unwrap();
        let k1: Vec<f64> = mesh.nodes.iter().map(|s| s.powf(0.7) / 0.7).collect();
        let k2: Vec<f64> = mesh.nodes.iter().map(|s| s.powf(1.7) / (0.7 * 1.7)).collect();
        let w = antiderivative_weights(&mesh.nodes, &k1, &k2);
        let r = build_rule(-0.3, &mesh).unwrap();
        for (a, b) in w.iter().zip(&r.weights) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((got - exact).abs() < 1e-13, "n = {n}, deg = {deg}");
            }
        }
        let r = composite_gauss(0.0, 1.0, 3, 8);
        assert!((r.apply(f64::exp) - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn second_order_convergence() {
        // ∫₀¹ s^(-1/2) cos(s) ds
        let exact = 1.809_048_475_800_538_6;
        let err = |n| {
            let r = build_rule(-0.5, &GradedMesh::new(1.0, n, 2.0).unwrap()).unwrap();
            (r.apply(f64::cos) - exact).abs()
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e1 / e2 > 3.5, "{e1} {e2}");
    }

    #[test]
    fn hybrid_rule_on_power_kernel() {
        // K = s^(-0.4): K1 = s^0.6/0.6, K2 = s^1.6/0.96; y = cos
        let mesh = GradedMesh::new(1.0, 40, 2.0).unwrap();
        let rule = hybrid_product_rule(&mesh.nodes, |n, s| {
            Ok(match n {
                0 => s.powf(-0.4),
                1 => s.powf(0.6) / 0.6,
                _ => s.powf(1.6) / 0.96,
            })
        })
        .unwrap();
        assert!((rule.apply(|_| 1.0) - 1.0 / 0.6).abs() < 1e-13);
        let exact = 1.483_209_365_735_964_4; // ∫₀¹ s^-0.4 cos s ds
        assert!((rule.apply(f64::cos) - exact).abs() < 5e-6, "{}", rule.apply(f64::cos));
    }

    #[test]
    fn singular_and_geometric_gauss() {
        let r = left_singular_gauss(0.0, 2.0, -0.5, 2, 8).unwrap();
        assert!((r.apply(|s| 1.0 + s) - (2.0 * 2f64.sqrt() + 2.0 / 3.0 * 2f64.powf(1.5))).abs() < 1e-13);
        let g = geometric_gauss(1.0, 30, 8);
        assert!((g.apply(f64::sqrt) - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation() {
        let n = [0.0, 1.0, 3.0];
        let v = [1.0, 2.0, 0.0];
        assert_eq!(interp_linear(&n, &v, 2.0), 1.0);
        assert_eq!(interp_linear(&n, &v, -1.0), 1.0);
        assert_eq!(interp_linear(&n, &v, 3.0), 0.0);
    }

    proptest! {
        #[test]
        fn weights_nonnegative(w in -0.99f64..=0.0, n in 1usize..60, r in 1.0f64..4.0, len in 0.1f64..5.0) {
            let rule = build_rule(w, &GradedMesh::new(len, n, r).unwrap()).unwrap();
            prop_assert!(rule.weights.iter().all(|&x| x >= 0.0));
        }

        #[test]
        fn linear_exactness(w in -0.9f64..2.0, n in 1usize..60, r in 1.0f64..3.0, c0 in -2.0f64..2.0, c1 in -2.0f64..2.0) {
            let rule = build_rule(w, &GradedMesh::new(1.0, n, r).unwrap()).unwrap();
            let exact = c0 / (w + 1.0) + c1 / (w + 2.0);
            prop_assert!((rule.apply(|s| c0 + c1 * s) - exact).abs() < 1e-13 * (1.0 + exact.abs()));
        }
    }
}
