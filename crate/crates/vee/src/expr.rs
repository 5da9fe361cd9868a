//! Arithmetic expressions in catalogue data, evaluated with `fasteval`.

use std::collections::BTreeMap;

use crate::error::CatalogueError;

pub type Env = BTreeMap<String, f64>;

const PHI: f64 = 1.618_033_988_749_895;

/// Rewrites unary minus as `(0-1)*` so that `-x^2` means `-(x^2)`;
/// `fasteval` alone would read it as `(-x)^2`.
fn normalize(expr: &str) -> Result<String, CatalogueError> {
    let mut out = String::with_capacity(expr.len() + 8);
    let mut prev: Option<char> = None;
    for c in expr.chars() {
        if c == '-' && prev.is_none_or(|p| "(,+-*/^<>=&|!".contains(p)) {
            if prev == Some('^') {
                return Err(CatalogueError::Expression {
                    expr: expr.into(),
                    message: "negative exponent needs parentheses".into(),
                });
            }
            out.push_str("(0-1)*");
        } else {
            out.push(c);
        }
        if !c.is_whitespace() {
            prev = Some(c);
        }
    }
    Ok(out)
}

/// Evaluates `expr` with `sqrt`, the constant `phi`, and the bindings in `env`.
pub fn eval(expr: &str, env: &Env) -> Result<f64, CatalogueError> {
    let text = normalize(expr)?;
    let mut ns = |name: &str, args: Vec<f64>| -> Option<f64> {
        match (name, args.as_slice()) {
            ("sqrt", [x]) => Some(x.sqrt()),
            ("phi", []) => Some(PHI),
            (v, []) => env.get(v).copied(),
            _ => None,
        }
    };
    let v = fasteval::ez_eval(&text, &mut ns).map_err(|e| CatalogueError::Expression {
        expr: expr.into(),
        message: format!("{e:?}"),
    })?;
    if !v.is_finite() {
        return Err(CatalogueError::Expression {
            expr: expr.into(),
            message: "value is not finite".into(),
        });
    }
    Ok(v)
}

/// Evaluates a predicate such as `s + t > 1`; nonzero means true.
pub fn holds(pred: &str, env: &Env) -> Result<bool, CatalogueError> {
    Ok(eval(pred, env)? != 0.0)
}
