//! JSON schema shared by every subcommand.
//!
//! Complex numbers are `[re, im]`, curve points `[x_re, x_im, y_re, y_im]`,
//! polynomials are ascending coefficient lists. A denominator is either a
//! polynomial or a factored object `{"scale": [re, im], "roots": [[re, im, m], ...]}`.

use derham::{Curve64, CurvePoint64, Denom64, Differential64, Divisor64, Kind, MeroFunction64, Poly64, Term, C64};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub type Cx = [f64; 2];
pub type Pt = [f64; 4];

/// Separation used to cluster numerically repeated roots of a user-supplied
/// denominator polynomial.
pub const ROOT_CLUSTER: f64 = 1e-6;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
pub struct JobInput {
    #[serde(rename = "P")]
    pub p: Vec<Cx>,
    #[serde(rename = "D", default, skip_serializing_if = "Vec::is_empty")]
    pub d: Vec<Pt>,
    #[serde(rename = "D0", default, skip_serializing_if = "Vec::is_empty")]
    pub d0: Vec<Pt>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pp: Vec<Cx>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<Pt>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub differentials: Vec<DiffJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<DiffJson>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum DenomJson {
    Factored { scale: Cx, roots: Vec<[f64; 3]> },
    Poly(Vec<Cx>),
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct TermJson {
    #[serde(default)]
    pub a: Vec<Cx>,
    #[serde(default)]
    pub b: Vec<Cx>,
    pub c: DenomJson,
}

/// A differential is one term `{a, b, c}` or a sum `{"terms": [...]}`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum DiffJson {
    Sum { terms: Vec<TermJson> },
    Single(TermJson),
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct FuncJson {
    pub p: Vec<Cx>,
    pub q: Vec<Cx>,
    pub r: DenomJson,
}

pub fn cx(z: Cx) -> C64 {
    C64::new(z[0], z[1])
}

pub fn to_cx(z: C64) -> Cx {
    [z.re, z.im]
}

pub fn poly(c: &[Cx]) -> Poly64 {
    Poly64::new(c.iter().map(|&z| cx(z)).collect())
}

pub fn poly_json(p: &Poly64) -> Vec<Cx> {
    p.coeffs().iter().map(|&z| to_cx(z)).collect()
}

pub fn point_json(p: &CurvePoint64) -> Pt {
    [p.x.re, p.x.im, p.y.re, p.y.im]
}

pub fn divisor_json(d: &Divisor64) -> Vec<Pt> {
    d.points
        .iter()
        .flat_map(|(p, m)| std::iter::repeat_n(point_json(p), *m as usize))
        .collect()
}

pub fn curve(input: &JobInput) -> Result<Curve64, CliError> {
    if input.p.is_empty() {
        return Err(CliError::Input("missing curve polynomial \"P\"".into()));
    }
    Ok(Curve64::new(input.p.iter().map(|&z| cx(z)).collect())?)
}

pub fn point(c: &Curve64, p: Pt) -> Result<CurvePoint64, CliError> {
    Ok(c.point(C64::new(p[0], p[1]), C64::new(p[2], p[3]))?)
}

pub fn divisor(c: &Curve64, pts: &[Pt], name: &str) -> Result<Divisor64, CliError> {
    if pts.is_empty() {
        return Err(CliError::Input(format!("missing divisor \"{name}\"")));
    }
    let mut d = Divisor64::simple(&[]);
    for &p in pts {
        d.add_point(point(c, p)?, 1, c.tol().separation);
    }
    Ok(d)
}

pub fn denom(c: &DenomJson) -> Result<Denom64, CliError> {
    match c {
        DenomJson::Poly(p) => Ok(Denom64::from_poly(&poly(p), ROOT_CLUSTER)?),
        DenomJson::Factored { scale, roots } => {
            let mut factors = Vec::with_capacity(roots.len());
            for r in roots {
                if r[2] < 1.0 || r[2].fract() != 0.0 {
                    return Err(CliError::Input(format!("root multiplicity {} is not a positive integer", r[2])));
                }
                factors.push((C64::new(r[0], r[1]), r[2] as u32));
            }
            if cx(*scale) == C64::new(0.0, 0.0) {
                return Err(CliError::Input("denominator scale is zero".into()));
            }
            Ok(Denom64::from_factors(cx(*scale), &factors, 1e-12))
        }
    }
}

pub fn denom_json(d: &Denom64) -> DenomJson {
    DenomJson::Factored {
        scale: to_cx(d.scale),
        roots: d.roots.iter().map(|(r, m)| [r.re, r.im, *m as f64]).collect(),
    }
}

fn term(t: &TermJson) -> Result<Term<f64>, CliError> {
    Ok(Term {
        a: poly(&t.a),
        b: poly(&t.b),
        c: denom(&t.c)?,
    })
}

fn term_json(t: &Term<f64>) -> TermJson {
    TermJson {
        a: poly_json(&t.a),
        b: poly_json(&t.b),
        c: denom_json(&t.c),
    }
}

pub fn differential(w: &DiffJson) -> Result<Differential64, CliError> {
    let terms = match w {
        DiffJson::Single(t) => vec![term(t)?],
        DiffJson::Sum { terms } => terms.iter().map(term).collect::<Result<_, _>>()?,
    };
    Ok(Differential64::from_terms(terms, Kind::General))
}

/// Exact parts are written out as rational terms.
pub fn differential_json(cv: &Curve64, w: &Differential64) -> DiffJson {
    match w.rational_terms(cv).as_slice() {
        [t] => DiffJson::Single(term_json(t)),
        ts => DiffJson::Sum {
            terms: ts.iter().map(term_json).collect(),
        },
    }
}

pub fn function_json(f: &MeroFunction64) -> FuncJson {
    FuncJson {
        p: poly_json(&f.p),
        q: poly_json(&f.q),
        r: denom_json(&f.r),
    }
}

pub fn matrix_json(m: &derham::linalg::CMat<f64>) -> Vec<Vec<Cx>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| to_cx(m[(i, j)])).collect())
        .collect()
}

pub fn parse(text: &str) -> Result<JobInput, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("invalid job JSON: {e}")))
}

/// Pretty JSON with a trailing newline.
pub fn render<S: Serialize>(v: &S) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}
