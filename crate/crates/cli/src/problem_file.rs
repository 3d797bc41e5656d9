//! INI problem files.
//!
//! ```ini
//! [problem]
//! F = y*sqrt(1+yp^2)
//! a = 0
//! b = 1
//! regime = mixed-left-free
//! B = 2
//!
//! [isoperimetric]      ; optional
//! G = sqrt(1+yp^2)
//! ell = 2
//! lambda = 2.05205714
//!
//! [extremal]
//! y = omega*cosh(x/omega)
//!
//! [params]             ; optional, evaluated in order
//! omega = 1.6966758762
//!
//! [accessory]          ; optional
//! u0 = 1
//! ```
//!
//! Numeric keys accept constant expressions in the parameters.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ini::{Ini, Properties};
use jacobi_core::expression::{parse, Expr, Params, Variable};
use jacobi_core::problem::{
    BoundaryRegime, Extremal, ExtremalProblem, Interval, RegimeKind, VariationalProblem,
};

const SECTIONS: [(&str, &[&str]); 5] = [
    ("problem", &["F", "a", "b", "regime", "A", "B"]),
    ("isoperimetric", &["G", "ell", "lambda"]),
    ("extremal", &["y"]),
    ("params", &[]),
    ("accessory", &["u0", "v0"]),
];

/// A parsed problem file.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub problem: ExtremalProblem,
    pub params: Params,
    pub u0: Option<f64>,
    pub v0: Option<f64>,
}

pub fn load(path: &Path) -> Result<ProblemFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_problem(&text).with_context(|| format!("in {}", path.display()))
}

fn section<'a>(ini: &'a Ini, name: &str) -> Result<&'a Properties> {
    ini.section(Some(name))
        .ok_or_else(|| anyhow!("missing [{name}] section"))
}

fn required<'a>(props: &'a Properties, section: &str, key: &str) -> Result<&'a str> {
    props
        .get(key)
        .ok_or_else(|| anyhow!("missing key `{key}` in [{section}]"))
}

fn expression(src: &str, params: &Params, what: &str) -> Result<Expr> {
    parse(src, params).map_err(|e| {
        anyhow!(
            "{what}: {e}\n  {src}\n  {:>width$}",
            "^",
            width = e.offset() + 1
        )
    })
}

fn constant(src: &str, params: &Params, what: &str) -> Result<f64> {
    let e = expression(src, params, what)?;
    if Variable::ALL.iter().any(|&v| e.depends_on(v)) {
        bail!("{what}: expected a constant, found an expression in x, y or yp");
    }
    let value = e
        .eval(0.0, 0.0, 0.0)
        .map_err(|err| anyhow!("{what}: {err}"))?;
    Ok(value)
}

fn check_layout(ini: &Ini) -> Result<()> {
    if !ini.general_section().is_empty() {
        bail!("keys outside a section");
    }
    for name in ini.sections().flatten() {
        let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| *s == name) else {
            bail!("unknown section [{name}]");
        };
        if name == "params" {
            continue;
        }
        let props = ini.section(Some(name)).expect("listed section");
        for (key, _) in props.iter() {
            if !keys.contains(&key) {
                bail!("unknown key `{key}` in [{name}]");
            }
        }
    }
    Ok(())
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let ini =
        Ini::load_from_str_noescape(text).map_err(|e| anyhow!("malformed problem file: {e}"))?;
    check_layout(&ini)?;

    let mut params = Params::new();
    if let Some(props) = ini.section(Some("params")) {
        for (name, src) in props.iter() {
            if Variable::from_name(name).is_some() || matches!(name, "pi" | "e") {
                bail!("parameter name `{name}` is reserved");
            }
            let value = constant(src, &params, &format!("params.{name}"))?;
            params.insert(name.to_string(), value);
        }
    }

    let p = section(&ini, "problem")?;
    let extremal_section = section(&ini, "extremal")?;
    let f = expression(required(p, "problem", "F")?, &params, "problem.F")?;
    let a = constant(required(p, "problem", "a")?, &params, "problem.a")?;
    let b = constant(required(p, "problem", "b")?, &params, "problem.b")?;
    let interval = Interval::new(a, b)?;
    let regime_name = required(p, "problem", "regime")?;
    let value = |key: &str| -> Result<f64> {
        constant(
            required(p, "problem", key)?,
            &params,
            &format!("problem.{key}"),
        )
    };
    let regime = match regime_name {
        "dirichlet" => BoundaryRegime::dirichlet(value("A")?, value("B")?),
        "mixed-left-free" => BoundaryRegime::mixed_left_free(value("B")?),
        "mixed-right-free" => BoundaryRegime::mixed_right_free(value("A")?),
        other => bail!(
            "unknown regime `{other}` (expected dirichlet, mixed-left-free or mixed-right-free)"
        ),
    };
    let mut problem = VariationalProblem::new(f, interval, regime);

    if let Some(iso) = ini.section(Some("isoperimetric")) {
        let g = expression(
            required(iso, "isoperimetric", "G")?,
            &params,
            "isoperimetric.G",
        )?;
        let ell = constant(
            required(iso, "isoperimetric", "ell")?,
            &params,
            "isoperimetric.ell",
        )?;
        let lambda = constant(
            required(iso, "isoperimetric", "lambda")?,
            &params,
            "isoperimetric.lambda",
        )?;
        problem = problem.with_constraint(g, ell, lambda);
    }

    let y = expression(
        required(extremal_section, "extremal", "y")?,
        &params,
        "extremal.y",
    )?;
    let extremal = Extremal::new(y)?;

    let mut u0 = None;
    let mut v0 = None;
    if let Some(acc) = ini.section(Some("accessory")) {
        if let Some(src) = acc.get("u0") {
            u0 = Some(constant(src, &params, "accessory.u0")?);
        }
        if let Some(src) = acc.get("v0") {
            v0 = Some(constant(src, &params, "accessory.v0")?);
        }
    }
    if regime.kind == RegimeKind::Dirichlet
        && (u0.is_some_and(|u| u != 0.0) || v0.is_some_and(|v| v != 0.0))
    {
        bail!("[accessory] u0 and v0 must be 0 for a dirichlet problem");
    }

    Ok(ProblemFile {
        problem: ExtremalProblem::new(problem, extremal),
        params,
        u0,
        v0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use jacobi_core::problem::CoefficientField;

    const CATENARY: &str = "\
[params]
omega = 1.696675876189958
[problem]
F = y*sqrt(1+yp^2)
a = 0
b = 1
regime = mixed-left-free
B = omega*cosh(1/omega)
[extremal]
y = omega*cosh(x/omega)
";

    #[test]
    fn parses_catenary() {
        let file = parse_problem(CATENARY).unwrap();
        assert_eq!(file.params["omega"], 1.696675876189958);
        let p = &file.problem;
        assert_eq!(p.regime(), RegimeKind::MixedLeftFree);
        assert!(!p.is_isoperimetric());
        let c = p.coefficients_at(0.0).unwrap();
        assert!((c.p - 1.696675876189958).abs() < 1e-7);
    }

    #[test]
    fn missing_extremal_section_is_named() {
        let text = CATENARY.replace("[extremal]\ny = omega*cosh(x/omega)\n", "");
        let err = parse_problem(&text).unwrap_err().to_string();
        assert!(err.contains("[extremal]"), "{err}");
    }

    #[test]
    fn regime_specific_keys() {
        let text = CATENARY.replace("regime = mixed-left-free", "regime = dirichlet");
        let err = parse_problem(&text).unwrap_err().to_string();
        assert!(err.contains("`A`"), "{err}");
        let text = CATENARY.replace("regime = mixed-left-free", "regime = free");
        assert!(parse_problem(&text).is_err());
    }

    #[test]
    fn syntax_errors_point_at_offset() {
        let text = CATENARY.replace("y*sqrt(1+yp^2)", "y*(1+");
        let err = format!("{:#}", parse_problem(&text).unwrap_err());
        assert!(
            err.contains("problem.F") && err.contains("offset 5"),
            "{err}"
        );
    }

    #[test]
    fn unknown_keys_and_sections() {
        assert!(parse_problem(&format!("{CATENARY}[extra]\nk = 1\n")).is_err());
        let text = CATENARY.replace("b = 1", "b = 1\nc = 2");
        assert!(parse_problem(&text)
            .unwrap_err()
            .to_string()
            .contains("`c`"));
        assert!(parse_problem(&format!("k = 1\n{CATENARY}")).is_err());
    }

    #[test]
    fn constants_must_not_depend_on_variables() {
        let text = CATENARY.replace("b = 1", "b = x");
        assert!(parse_problem(&text)
            .unwrap_err()
            .to_string()
            .contains("constant"));
    }

    #[test]
    fn isoperimetric_and_accessory_sections() {
        let text = format!("{CATENARY}[isoperimetric]\nG = sqrt(1+yp^2)\nell = 2\nlambda = 0\n[accessory]\nu0 = -2\n");
        let file = parse_problem(&text).unwrap();
        assert!(file.problem.is_isoperimetric());
        assert_eq!(file.u0, Some(-2.0));
        assert_eq!(file.v0, None);
    }

    #[test]
    fn inline_comments() {
        let text = CATENARY.replace("b = 1", "b = 1   ; right end");
        assert_eq!(parse_problem(&text).unwrap().problem.interval().b(), 1.0);
    }

    #[test]
    fn parameters_may_reference_earlier_ones() {
        let text = CATENARY.replace("omega = 1.696675876189958", "k = 2\nomega = k/2");
        assert_eq!(parse_problem(&text).unwrap().params["omega"], 1.0);
        let text = CATENARY.replace("omega = 1.696675876189958", "x = 2");
        assert!(parse_problem(&text).is_err());
    }
}
