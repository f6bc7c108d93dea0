//! Command-line contract exercised in process through [`crate::run`].

use std::path::Path;

const BASE: &str = r#"{
    "params": {"alpha": 1, "beta": 0.5, "gamma": 0.5, "delta": -1},
    "coeffs": {"a": -1, "b": -1},
    "domain": {"q": 1, "p": 1},
    "phi": "1 + t", "psi": "sin(x) - 0.5", "M": "1", "f_smooth": "1 + t*x",
    "grid": {"n_t": 17, "n_x": 17}
}"#;

struct Captured {
    code: i32,
    out: String,
    err: String,
}

fn call(args: &[&str]) -> Captured {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = crate::run(std::iter::once("ptel").chain(args.iter().copied()), &mut out, &mut err);
    Captured { code, out: String::from_utf8_lossy(&out).into_owned(), err: String::from_utf8_lossy(&err).into_owned() }
}

fn write(dir: &Path, name: &str, text: &str) -> Result<String, String> {
    let p = dir.join(name);
    std::fs::write(&p, text).map_err(|e| format!("{}: {e}", p.display()))?;
    Ok(p.to_string_lossy().into_owned())
}

fn expect(label: &str, got: &Captured, want: i32) -> Result<(), String> {
    if got.code == want {
        Ok(())
    } else {
        Err(format!("{label}: exit {} (wanted {want}); {}", got.code, got.err.trim()))
    }
}

fn read(p: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(p).map_err(|e| format!("{}: {e}", p.display()))
}

pub(crate) fn run_contract() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let cfg = write(d, "base.json", BASE)?;
    let (one, two) = (d.join("one"), d.join("two"));
    let (one_s, two_s) = (one.to_string_lossy().into_owned(), two.to_string_lossy().into_owned());

    let s1 = call(&["solve", &cfg, "--out-dir", &one_s]);
    expect("solve", &s1, 0)?;
    let s2 = call(&["solve", &cfg, "--out-dir", &two_s]);
    expect("second solve", &s2, 0)?;
    for f in ["u.csv", "tau.csv"] {
        if read(&one.join(f))? != read(&two.join(f))? {
            return Err(format!("{f} differs between identical solves"));
        }
    }

    let v = call(&["verify", &cfg, "--out-dir", &one_s]);
    expect("verify", &v, 0)?;
    let block = s1.out.find("residuals:").map(|k| &s1.out[k..]).and_then(|r| r.find("wrote").map(|e| &r[..e])).unwrap_or("");
    if block.is_empty() || block != v.out {
        return Err(format!("verify report differs from solve:\n{block}---\n{}", v.out));
    }

    let regime = write(d, "regime.json", &BASE.replace(r#""a": -1"#, r#""a": 1"#))?;
    expect("a > 0 in strict mode", &call(&["solve", &regime, "--out-dir", &one_s]), 4)?;

    let headless = d.join("headless.csv");
    let text = String::from_utf8_lossy(&read(&one.join("u.csv"))?).into_owned();
    std::fs::write(&headless, text.split_once('\n').map(|(_, rest)| rest).unwrap_or("")).map_err(|e| e.to_string())?;
    expect("u.csv without header", &call(&["verify", &cfg, "--u", &headless.to_string_lossy()]), 2)?;

    let corrupt = d.join("corrupt.csv");
    std::fs::write(&corrupt, text.replacen(",1.0\n", ",oops\n", 1).lines().take(40).collect::<Vec<_>>().join("\n")).map_err(|e| e.to_string())?;
    let c = call(&["verify", &cfg, "--u", &corrupt.to_string_lossy()]);
    if c.code == 0 {
        return Err("verify accepted a corrupted u.csv".into());
    }

    let ml2 = call(&["ml2", "--alpha", "1", "--beta", "0.5", "--gamma", "0.5", "--a3", "0", "--a4", "0", "--x", "0.1", "--y", "0.1"]);
    expect("ml2 with Δ₁ <= 0", &ml2, 2)?;

    expect("ml series cap", &call(&["ml", "--alpha", "1", "--beta", "1", "--z", "30", "--max-terms", "3"]), 3)?;

    let degenerate = BASE.replace(r#""a": -1"#, r#""a": 0"#).replace(r#""grid""#, r#""mode": "relaxed", "grid""#);
    let degenerate = write(d, "degenerate.json", &degenerate)?;
    expect("A = 0", &call(&["solve", &degenerate, "--out-dir", &one_s]), 5)?;

    let unknown = write(d, "unknown.json", &BASE.replace(r#""phi""#, r#""colour": "red", "phi""#))?;
    expect("unknown config key", &call(&["solve", &unknown, "--out-dir", &one_s]), 2)?;

    Ok("deterministic output, solve/verify agree, exit codes 2 3 4 5".into())
}
