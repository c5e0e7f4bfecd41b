//! Formula arguments such as `--u "0.5*(1-x^2)"`, parsed with `evalexpr`.

use evalexpr::{build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value};
use fracvexp::Error;

#[derive(Clone, Debug)]
pub struct Expr {
    source: String,
    tree: Node<DefaultNumericTypes>,
    names: Vec<&'static str>,
}

impl Expr {
    /// Parses `source`, allowing only the listed variable names.
    pub fn parse(source: &str, names: &[&'static str]) -> Result<Self, Error> {
        let tree = build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| Error::Parse(format!("expression {source:?}: {e}")))?;
        if let Some(bad) = tree.iter_read_variable_identifiers().find(|v| !names.contains(v)) {
            return Err(Error::Parse(format!(
                "expression {source:?} uses unknown variable {bad:?}; allowed: {}",
                names.join(", ")
            )));
        }
        let expr = Expr {
            source: source.to_string(),
            tree,
            names: names.to_vec(),
        };
        let probe = vec![0.5; names.len()];
        expr.try_eval(&probe)?;
        Ok(expr)
    }

    /// Value of a formula without variables.
    pub fn constant(&self) -> Option<f64> {
        if self.tree.iter_read_variable_identifiers().next().is_none() {
            self.try_eval(&vec![0.0; self.names.len()]).ok()
        } else {
            None
        }
    }

    /// Evaluates with `values[i]` bound to the i-th allowed name.
    pub fn try_eval(&self, values: &[f64]) -> Result<f64, Error> {
        let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
        for (name, v) in self.names.iter().zip(values) {
            ctx.set_value((*name).to_string(), Value::Float(*v))
                .map_err(|e| Error::Parse(format!("expression {:?}: {e}", self.source)))?;
        }
        self.tree
            .eval_number_with_context(&ctx)
            .map_err(|e| Error::Parse(format!("expression {:?}: {e}", self.source)))
    }

    /// Like [`Expr::try_eval`], with evaluation failures mapped to NaN.
    pub fn eval(&self, values: &[f64]) -> f64 {
        self.try_eval(values).unwrap_or(f64::NAN)
    }
}

/// Variables of spatial formulas: coordinates `x`, `y` and radius `r`.
pub const SPACE: &[&str] = &["x", "y", "r"];

pub fn space_values(p: &[f64]) -> [f64; 3] {
    let x = p[0];
    let y = p.get(1).copied().unwrap_or(0.0);
    [x, y, (x * x + y * y).sqrt()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formulas_in_space() {
        let e = Expr::parse("0.5*max(1-r^2, 0)", SPACE).unwrap();
        assert_eq!(e.eval(&space_values(&[0.0])), 0.5);
        assert_eq!(e.eval(&space_values(&[2.0, 0.0])), 0.0);
        assert_eq!(Expr::parse("3", SPACE).unwrap().constant(), Some(3.0));
        assert!(Expr::parse("x + z", SPACE).is_err());
        assert!(Expr::parse("x +", SPACE).is_err());
    }
}
