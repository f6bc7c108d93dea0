//! CSV and SVG emitters. All text is produced with `\n` line ends and
//! Rust's locale-free float formatting.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Writes `bytes` to a temporary file beside `path`, then renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// `%.{sig}g`-style formatting.
pub fn fmt_sig(v: f64, sig: usize) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", sig - 1, v);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -5 || exp >= sig as i32 {
        let mant = trim_zeros(mant);
        return format!("{mant}e{exp}");
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `t,x,u` rows, t outer, x inner. Values use the shortest round-trip form.
pub fn u_csv(t: &[f64], x: &[f64], u: &[Vec<f64>]) -> String {
    let mut s = String::from("t,x,u\n");
    for (i, ti) in t.iter().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            let _ = writeln!(s, "{ti:?},{xj:?},{:?}", u[i][j]);
        }
    }
    s
}

pub fn tau_csv(x: &[f64], tau: &[f64]) -> String {
    let mut s = String::from("x,tau\n");
    for (xj, v) in x.iter().zip(tau) {
        let _ = writeln!(s, "{xj:?},{v:?}");
    }
    s
}

/// A solution grid read back from `u.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvGrid {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<Vec<f64>>,
}

/// Parses `u.csv` and checks it is an `n_t` × `n_x` row-major grid.
pub fn read_u_csv(text: &str, n_t: usize, n_x: usize) -> CliResult<CsvGrid> {
    let mut lines = text.lines();
    match lines.next().map(str::trim) {
        Some("t,x,u") => {}
        Some(h) => return Err(CliError::Input(format!("u.csv: expected header \"t,x,u\", found {h:?}"))),
        None => return Err(CliError::Input("u.csv: empty file".into())),
    }
    let mut rows = Vec::with_capacity(n_t * n_x);
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 3 {
            return Err(CliError::Input(format!("u.csv line {}: expected 3 fields", k + 2)));
        }
        let mut v = [0.0; 3];
        for (slot, c) in v.iter_mut().zip(&cells) {
            *slot = c.trim().parse().map_err(|_| CliError::Input(format!("u.csv line {}: bad number {c:?}", k + 2)))?;
        }
        rows.push(v);
    }
    if rows.len() != n_t * n_x {
        return Err(CliError::Input(format!("u.csv has {} rows; the config grid needs {n_t} x {n_x} = {}", rows.len(), n_t * n_x)));
    }
    let t: Vec<f64> = (0..n_t).map(|i| rows[i * n_x][0]).collect();
    let x: Vec<f64> = (0..n_x).map(|j| rows[j][1]).collect();
    if t.windows(2).any(|w| !(w[0] < w[1])) || x.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(CliError::Input("u.csv: t and x nodes must be strictly ascending".into()));
    }
    let mut u = vec![vec![0.0; n_x]; n_t];
    for i in 0..n_t {
        for j in 0..n_x {
            let r = rows[i * n_x + j];
            if r[0] != t[i] || r[1] != x[j] {
                return Err(CliError::Input(format!("u.csv row {} is not in t-major grid order", i * n_x + j + 2)));
            }
            u[i][j] = r[2];
        }
    }
    Ok(CsvGrid { t, x, u })
}

/// Static line chart of τ(x) and u(t, ·) at a few t sections.
pub fn svg_plot(t: &[f64], x: &[f64], u: &[Vec<f64>], tau: &[f64]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 50.0;
    const COLOURS: [&str; 5] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"];
    let nt = t.len() - 1;
    let mut sections: Vec<usize> = (0..=4).map(|k| k * nt / 4).collect();
    sections.dedup();
    let mut lo = tau.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = tau.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for &i in &sections {
        for v in &u[i] {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let (x0, x1) = (x[0], x[x.len() - 1]);
    let px = |v: f64| PAD + (v - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |v: f64| H - PAD - (v - lo) / (hi - lo) * (H - 2.0 * PAD);
    let path = |ys: &[f64]| {
        let mut d = String::new();
        for (k, (xv, yv)) in x.iter().zip(ys).enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if k == 0 { "M" } else { " L" }, px(*xv), py(*yv));
        }
        d
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r##"<path d="M{PAD},{PAD} L{PAD},{b} L{r},{b}" fill="none" stroke="#444"/>"##, b = H - PAD, r = W - PAD);
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">x</text>"#, W / 2.0, H - 15.0);
    for (v, y) in [(lo, H - PAD), (hi, PAD)] {
        let _ = writeln!(s, r#"<text x="{}" y="{y:.2}" font-size="11" text-anchor="end">{}</text>"#, PAD - 6.0, fmt_sig(v, 4));
    }
    for (k, &i) in sections.iter().enumerate() {
        let c = COLOURS[k % COLOURS.len()];
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#, path(&u[i]));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{c}">u(t={}, x)</text>"#,
            W - PAD + 4.0 - 120.0,
            PAD + 14.0 * (k as f64 + 1.0),
            fmt_sig(t[i], 3)
        );
    }
    let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="black" stroke-dasharray="5,3"/>"#, path(tau));
    let _ = writeln!(s, r#"<text x="{}" y="{}" font-size="11">tau(x)</text>"#, W - PAD - 116.0, PAD);
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(std::f64::consts::E, 15), "2.71828182845905");
        assert_eq!(fmt_sig(1.0, 15), "1");
        assert_eq!(fmt_sig(-0.000123456, 3), "-0.000123");
        assert_eq!(fmt_sig(1.5e-9, 15), "1.5e-9");
        assert_eq!(fmt_sig(123456789.0, 4), "1.235e8");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = vec![0.0, 0.5, 1.0];
        let x = vec![0.0, 1.0 / 3.0];
        let u = vec![vec![1.0, 0.1 + 0.2], vec![-1e-300, 2.5], vec![std::f64::consts::PI, 7.0]];
        let text = u_csv(&t, &x, &u);
        assert!(text.starts_with("t,x,u\n0.0,0.0,1.0\n"));
        let g = read_u_csv(&text, 3, 2).unwrap();
        assert_eq!(g, CsvGrid { t, x, u });
    }

    #[test]
    fn csv_shape_errors() {
        assert!(read_u_csv("0,0,1\n", 1, 1).is_err());
        assert!(read_u_csv("t,x,u\n0,0,1\n", 2, 1).is_err());
        assert!(read_u_csv("t,x,u\n0,0,1\n0,1,zz\n", 1, 2).is_err());
        assert!(read_u_csv("t,x,u\n0,1,1\n0,0,1\n", 1, 2).is_err());
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("f.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
    }

    #[test]
    fn plot_is_well_formed() {
        let x = vec![0.0, 0.5, 1.0];
        let s = svg_plot(&[0.0, 1.0], &x, &[vec![1.0; 3], vec![1.0; 3]], &[1.0; 3]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<path").count(), 4);
    }
}
