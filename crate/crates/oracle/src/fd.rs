//! Second-order finite differences for u_tx − a u_x − b u_t = f with
//! u(0, x) = τ(x) and u(t, 0) = φ(t).

#[derive(Debug, Clone, PartialEq)]
pub struct FdGrid {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    /// u[i][j] at (t[i], x[j]).
    pub u: Vec<Vec<f64>>,
}

/// Integrates the equation over each cell: the mixed derivative exactly,
/// first derivatives by the trapezoid rule along cell edges and f at the
/// cell centre. Marches explicitly in i and j.
#[allow(clippy::too_many_arguments)]
pub fn classical_telegraph_fd(
    a: f64,
    b: f64,
    t_max: f64,
    x_max: f64,
    phi: &dyn Fn(f64) -> f64,
    tau: &dyn Fn(f64) -> f64,
    f: &dyn Fn(f64, f64) -> f64,
    n: usize,
) -> crate::Result<FdGrid> {
    if n == 0 || !(t_max > 0.0) || !(x_max > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(crate::OracleError::InvalidParams(format!(
            "fd needs n ≥ 1, positive extents and finite coefficients (got n = {n}, {t_max}, {x_max}, a = {a}, b = {b})"
        )));
    }
    let (ht, hx) = (t_max / n as f64, x_max / n as f64);
    let t: Vec<f64> = (0..=n).map(|i| i as f64 * ht).collect();
    let x: Vec<f64> = (0..=n).map(|j| j as f64 * hx).collect();
    let (ca, cb) = (a * ht / 2.0, b * hx / 2.0);
    let pivot = 1.0 - ca - cb;
    if pivot.abs() < 1e-12 {
        return Err(crate::OracleError::InvalidParams(format!("fd pivot vanishes for a = {a}, b = {b}, n = {n}")));
    }
    let mut u = vec![vec![0.0; n + 1]; n + 1];
    for (j, &xj) in x.iter().enumerate() {
        u[0][j] = tau(xj);
    }
    for i in 0..n {
        u[i + 1][0] = phi(t[i + 1]);
        for j in 0..n {
            let (u00, u01, u10) = (u[i][j], u[i][j + 1], u[i + 1][j]);
            let src = ht * hx * f(t[i] + ht / 2.0, x[j] + hx / 2.0);
            let rhs = u10 + u01 - u00 + ca * (u01 - u00 - u10) + cb * (u10 - u00 - u01) + src;
            u[i + 1][j + 1] = rhs / pivot;
        }
    }
    Ok(FdGrid { t, x, u })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(g: &FdGrid, exact: impl Fn(f64, f64) -> f64) -> f64 {
        let mut e: f64 = 0.0;
        for (i, &t) in g.t.iter().enumerate() {
            for (j, &x) in g.x.iter().enumerate() {
                e = e.max((g.u[i][j] - exact(t, x)).abs());
            }
        }
        e
    }

    #[test]
    fn wave_part_is_exact_without_lower_order_terms() {
        // u = T(t) + X(x) + t x solves u_tx = 1.
        let exact = |t: f64, x: f64| t.sin() + x * x + t * x;
        let g = classical_telegraph_fd(0.0, 0.0, 1.0, 2.0, &|t| exact(t, 0.0), &|x| exact(0.0, x), &|_, _| 1.0, 7).unwrap();
        assert!(max_err(&g, exact) < 1e-13);
    }

    #[test]
    fn constant_data_stays_constant() {
        let g = classical_telegraph_fd(0.7, -1.2, 1.0, 1.0, &|_| 2.5, &|_| 2.5, &|_, _| 0.0, 16).unwrap();
        assert!(max_err(&g, |_, _| 2.5) < 1e-14);
    }

    #[test]
    fn second_order_on_a_smooth_solution() {
        let (a, b) = (0.6, -0.4);
        let exact = |t: f64, x: f64| t.sin() * x.cos();
        // u_tx − a u_x − b u_t for u = sin t cos x
        let f = move |t: f64, x: f64| -t.cos() * x.sin() + a * t.sin() * x.sin() - b * t.cos() * x.cos();
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| max_err(&classical_telegraph_fd(a, b, 1.0, 1.0, &|t| exact(t, 0.0), &|x| exact(0.0, x), &f, n).unwrap(), exact))
            .collect();
        for w in errs.windows(2) {
            let r = w[0] / w[1];
            assert!((3.5..4.5).contains(&r), "{errs:?}");
        }
    }
}
