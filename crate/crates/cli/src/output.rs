//! JSON with 17 significant digits, and plain-text renderings.

use std::fmt::Write as _;
use std::io;

use confbound::bounds::{BoundsReport, CatalogEntry};
use confbound::suites::SuiteReport;
use confbound::{BbgConstant, SpectralResult, YamabeResult};
use serde::Serialize;

/// Compact JSON, floats in `{:.16e}` so they parse back bit for bit.
struct SignificantDigits;

impl serde_json::ser::Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SignificantDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn constant_text(c: &BbgConstant) -> String {
    let h = c.hypothesis;
    let mut s = format!(
        "a(eps = {}, alpha = {}) = {}\n",
        h.epsilon(),
        h.alpha(),
        c.value
    );
    if let Some(ca) = c.c_alpha {
        let _ = writeln!(s, "c(alpha) = {ca}");
    }
    s
}

pub fn report_text(r: &BoundsReport) -> String {
    let m = &r.summary_echo;
    let n = m.n().get();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "summary: n = {n}, d = {}, V = {}, Ric >= {}",
        m.diameter(),
        m.volume(),
        m.ricci_lower_bound()
    );
    let sc = m.scalar();
    let _ = writeln!(
        s,
        "scalar curvature: sup R+ = {}, sup R- = {}, |R+|_1 = {}, |R-|_1 = {}",
        sc.sup_plus, sc.sup_minus, sc.l1_plus, sc.l1_minus
    );
    let _ = writeln!(
        s,
        "hypothesis: eps = {}, alpha = {}; a = {}, (a/d)^2 = {}, beta = {}",
        r.hypothesis.epsilon(),
        r.hypothesis.alpha(),
        r.a,
        r.a_over_d2,
        r.beta
    );
    let _ = writeln!(
        s,
        "potential: h+ = {} on B(S, {}), h- = {} on B(N, {})",
        r.c_plus,
        r.r1.get(),
        r.c_minus,
        r.r2.get()
    );
    let _ = writeln!(
        s,
        "mu1(M) >= (a/d)^2 rho1 = {} * {} = {}",
        r.a_over_d2, r.rho1, r.mu1_lower_bound
    );
    let _ = writeln!(
        s,
        "lambda(M) >= (a/d)^2 beta^(2/{n}) rho = {} * {} * {} = {}{}",
        r.a_over_d2,
        r.beta.powf(2.0 / n as f64),
        r.rho,
        r.lambda_lower_bound,
        if r.rho_converged { "" } else { " (rho not converged)" }
    );
    if let Some(c) = r.corollary {
        let _ = writeln!(s, "closed form (Ric >= n-1): mu1(M) >= {}, lambda(M) >= {}", c.mu1, c.lambda);
    }
    let _ = writeln!(
        s,
        "lambda(S^{n}) = {}; bound - lambda(S^{n}) = {}",
        r.lambda_sphere, r.lambda_margin
    );
    for c in &r.caveats {
        let _ = writeln!(s, "caveat: {c}");
    }
    let _ = writeln!(s, "rigidity: {}", r.rigidity.label());
    s
}

pub fn spectrum_text(r: &SpectralResult) -> String {
    format!(
        "rho1 = {} (m = {}, residual {:e})\n",
        r.rho1,
        r.grid.cells(),
        r.residual_norm
    )
}

pub fn eigenvalues_text(values: &[f64]) -> String {
    let mut s = String::new();
    for (k, v) in values.iter().enumerate() {
        let _ = writeln!(s, "rho{} = {v}", k + 1);
    }
    s
}

pub fn yamabe_text(r: &YamabeResult) -> String {
    let mut s = String::new();
    for o in &r.starts {
        let _ = writeln!(
            s,
            "start {:<10} rho = {} after {} iterations{}",
            o.start.label(),
            o.rho,
            o.iterations,
            if o.converged { "" } else { " (not converged)" }
        );
    }
    let _ = writeln!(
        s,
        "rho = {} from {} (m = {}, converged: {}, EL residual {:e})",
        r.rho,
        r.start_label.label(),
        r.grid_size,
        r.converged,
        r.el_residual
    );
    s
}

pub fn profile_text(rows: &[(f64, f64)]) -> String {
    let mut s = String::from("s\tIs(s)\n");
    for (x, y) in rows {
        let _ = writeln!(s, "{x}\t{y}");
    }
    s
}

pub fn suite_text(r: &SuiteReport) -> String {
    let mut s = format!(
        "{} (seed {}): {}/{} passed, worst slack {:e}\n",
        r.suite,
        r.seed,
        r.count - r.failures,
        r.count,
        r.worst_slack
    );
    if let Some(f) = &r.first_failure {
        let _ = writeln!(s, "first failure: {f}");
    }
    s
}

pub fn catalog_text(entries: &[CatalogEntry]) -> String {
    let mut s = String::new();
    for e in entries {
        let known = e.known_lambda.map_or_else(|| "unknown".to_string(), |v| v.to_string());
        let _ = writeln!(s, "{:<14} n = {}  lambda = {known}  ({})", e.name, e.summary.n().get(), e.note);
    }
    s
}
