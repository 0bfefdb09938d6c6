use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::expr::{parse_expression_in, Expr, Scope, Var, VarKind};
use super::{BooleanControlNetwork, Dims, SignalOrder};
use crate::error::{Error, Result};
use crate::stp::{decode_index, encode_state, pow2, LogicalMatrix};

/// Update rules as written: `state[i]` is the right-hand side of `x_{i+1}⁺`,
/// `output[j]` the right-hand side of `y_{j+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UpdateRuleSet {
    pub state: Vec<String>,
    #[serde(default)]
    pub output: Vec<String>,
}

impl UpdateRuleSet {
    pub fn new<S: Into<String>>(state: impl IntoIterator<Item = S>) -> Self {
        Self { state: state.into_iter().map(Into::into).collect(), output: Vec::new() }
    }

    pub fn with_outputs<S: Into<String>>(mut self, output: impl IntoIterator<Item = S>) -> Self {
        self.output = output.into_iter().map(Into::into).collect();
        self
    }
}

/// Builds `L` (and `H`) by evaluating the rules on every column.
///
/// `dims.p` is taken from the number of output rules. `dims.s = 0` asks for
/// the smallest admissible `s`. If the output rules read state variables
/// other than the leading ones, those variables are moved to the front and
/// the permutation is recorded on the network.
pub fn compile_algebraic_form(rules: &UpdateRuleSet, dims: Dims, order: SignalOrder) -> Result<BooleanControlNetwork> {
    let Dims { n, m, d, t, .. } = dims;
    if rules.state.len() != n {
        return Err(Error::ArityMismatch(format!("{} state rules for n = {n}", rules.state.len())));
    }
    let scope = Scope { n, m, d, t };
    let output_scope = Scope { n, ..Scope::default() };
    let mut state: Vec<Expr> = rules.state.iter().map(|r| parse_expression_in(r, scope)).collect::<Result<_>>()?;
    let mut output: Vec<Expr> =
        rules.output.iter().map(|r| parse_expression_in(r, output_scope)).collect::<Result<_>>()?;

    let referenced: BTreeSet<usize> = output.iter().flat_map(|e| e.vars()).map(|v| v.index).collect();
    let needed = referenced.len().max(1);
    let mut permutation = None;
    if referenced.iter().copied().ne(1..=referenced.len()) {
        let perm: Vec<usize> = referenced.iter().copied().chain((1..=n).filter(|i| !referenced.contains(i))).collect();
        let mut new_pos = vec![0; n + 1];
        for (pos, &orig) in perm.iter().enumerate() {
            new_pos[orig] = pos + 1;
        }
        let rename = |v: Var| {
            if v.kind == VarKind::State {
                Var { index: new_pos[v.index], ..v }
            } else {
                v
            }
        };
        state = perm.iter().map(|&orig| state[orig - 1].rename(&rename)).collect();
        output = output.iter().map(|e| e.rename(&rename)).collect();
        permutation = Some(perm);
    }
    let s = match dims.s {
        0 => needed.min(n),
        s if s < referenced.len() => {
            return Err(Error::ArityMismatch(format!(
                "output rules read {} state variables but s = {s}",
                referenced.len()
            )))
        }
        s => s,
    };
    let p = output.len();
    if dims.p != 0 && dims.p != p {
        return Err(Error::ArityMismatch(format!("{p} output rules for p = {}", dims.p)));
    }

    let full = Dims { n, m, d, t, p, s };
    let bits = m + n + d + t;
    let mut cols = Vec::with_capacity(pow2(bits));
    for c in 1..=pow2(bits) {
        let v = decode_index(c, bits);
        let (u, rest) = v.split_at(m);
        let (x, tail) = rest.split_at(n);
        let (dv, fv) = match order {
            SignalOrder::DisturbanceFirst => tail.split_at(d),
            SignalOrder::FaultFirst => {
                let (f, dd) = tail.split_at(t);
                (dd, f)
            }
        };
        let env = |var: Var| match var.kind {
            VarKind::Input => u[var.index - 1],
            VarKind::State => x[var.index - 1],
            VarKind::Disturbance => dv[var.index - 1],
            VarKind::Fault => fv[var.index - 1],
        };
        let next: Vec<bool> = state.iter().map(|e| e.eval(&env)).collect();
        cols.push(encode_state(&next).index());
    }
    let l = LogicalMatrix::new(pow2(n), cols)?;
    let h = if output.is_empty() {
        None
    } else {
        let cols = (1..=pow2(n))
            .map(|x| {
                let xb = decode_index(x, n);
                let y: Vec<bool> = output.iter().map(|e| e.eval(&|v: Var| xb[v.index - 1])).collect();
                encode_state(&y).index()
            })
            .collect();
        Some(LogicalMatrix::new(pow2(p), cols)?)
    };
    let mut net = BooleanControlNetwork::new(full, order, l, h)?;
    net.set_rules(rules.clone(), permutation);
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::expr::parse_expression;
    use proptest::prelude::*;

    fn compile(rules: UpdateRuleSet, n: usize, m: usize) -> BooleanControlNetwork {
        compile_algebraic_form(&rules, Dims { s: 0, ..Dims::new(n, m) }, SignalOrder::default()).unwrap()
    }

    #[test]
    fn rotation_network() {
        let net = compile(UpdateRuleSet::new(["x2", "!x1"]), 2, 0);
        assert_eq!(net.l(), &LogicalMatrix::delta(4, &[2, 4, 1, 3]));
    }

    #[test]
    fn identity_network() {
        assert_eq!(compile(UpdateRuleSet::new(["x1"]), 1, 0).l(), &LogicalMatrix::delta(2, &[1, 2]));
    }

    #[test]
    fn conjunction_with_input() {
        assert_eq!(compile(UpdateRuleSet::new(["u1 & x1"]), 1, 1).l(), &LogicalMatrix::delta(2, &[1, 2, 2, 2]));
    }

    #[test]
    fn arity_and_identifier_errors() {
        let dims = Dims::new(2, 0);
        assert!(matches!(
            compile_algebraic_form(&UpdateRuleSet::new(["x1"]), dims, SignalOrder::default()),
            Err(Error::ArityMismatch(_))
        ));
        assert!(matches!(
            compile_algebraic_form(&UpdateRuleSet::new(["x1", "u1"]), dims, SignalOrder::default()),
            Err(Error::UnknownIdentifier { .. })
        ));
        let rules = UpdateRuleSet::new(["x1", "x2"]).with_outputs(["x1 & u1"]);
        assert!(matches!(
            compile_algebraic_form(&rules, Dims::new(2, 1), SignalOrder::default()),
            Err(Error::UnknownIdentifier { .. })
        ));
    }

    #[test]
    fn output_variables_are_moved_first() {
        // y reads x3 only, so x3 becomes the first variable.
        let rules = UpdateRuleSet::new(["x2", "x3", "!x1"]).with_outputs(["x3"]);
        let net = compile(rules, 3, 0);
        assert_eq!(net.permutation(), Some(&[3, 1, 2][..]));
        assert_eq!(net.dims().s, 1);
        // New variables (x3, x1, x2) evolve as (!x1, x2, x3).
        let direct = compile(UpdateRuleSet::new(["!x2", "x3", "x1"]).with_outputs(["x1"]), 3, 0);
        assert_eq!(net.l(), direct.l());
        assert_eq!(net.h(), direct.h());
        assert_eq!(net.h().unwrap(), &LogicalMatrix::delta(2, &[1, 1, 1, 1, 2, 2, 2, 2]));
    }

    #[test]
    fn disturbance_and_fault_order() {
        let rules = UpdateRuleSet::new(["d1 & !f1"]);
        let df = compile_algebraic_form(
            &rules,
            Dims::new(1, 0).with_disturbance(1).with_fault(1),
            SignalOrder::DisturbanceFirst,
        )
        .unwrap();
        let fd =
            compile_algebraic_form(&rules, Dims::new(1, 0).with_disturbance(1).with_fault(1), SignalOrder::FaultFirst)
                .unwrap();
        // Columns per x: (d,f) = (T,T) (T,F) (F,T) (F,F) in the first order.
        assert_eq!(&df.l().cols()[..4], &[2, 1, 2, 2]);
        // Second order enumerates (f,d).
        assert_eq!(&fd.l().cols()[..4], &[2, 2, 1, 2]);
    }

    /// Truth-table oracle: a random table rendered as a disjunction of
    /// minterms must compile back to the same table.
    fn minterm_rule(table: &[bool], names: &[String]) -> String {
        let terms: Vec<String> = table
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(|(row, _)| {
                let bits = decode_index(row + 1, names.len());
                let lits: Vec<String> =
                    names.iter().zip(bits).map(|(n, b)| if b { n.clone() } else { format!("!{n}") }).collect();
                format!("({})", lits.join(" & "))
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" | ")
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn compile_matches_truth_tables(
            (n, m, d, t) in (1usize..=3, 0usize..=2, 0usize..=2, 0usize..=1).prop_filter("≤ 8", |(n, m, d, t)| n + m + d + t <= 8),
            seed in any::<u64>(),
            fault_first in any::<bool>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let order = if fault_first { SignalOrder::FaultFirst } else { SignalOrder::DisturbanceFirst };
            let mut names: Vec<String> = (1..=m).map(|i| format!("u{i}")).collect();
            names.extend((1..=n).map(|i| format!("x{i}")));
            let tail: Vec<String> = match order {
                SignalOrder::DisturbanceFirst => (1..=d).map(|i| format!("d{i}")).chain((1..=t).map(|i| format!("f{i}"))).collect(),
                SignalOrder::FaultFirst => (1..=t).map(|i| format!("f{i}")).chain((1..=d).map(|i| format!("d{i}"))).collect(),
            };
            names.extend(tail);
            let bits = names.len();
            let tables: Vec<Vec<bool>> = (0..n).map(|_| (0..pow2(bits)).map(|_| rng.gen()).collect()).collect();
            let rules = UpdateRuleSet::new(tables.iter().map(|tb| minterm_rule(tb, &names)));
            let dims = Dims { s: 0, ..Dims::new(n, m).with_disturbance(d).with_fault(t) };
            let net = compile_algebraic_form(&rules, dims, order).unwrap();
            for c in 1..=pow2(bits) {
                let next: Vec<bool> = tables.iter().map(|tb| tb[c - 1]).collect();
                prop_assert_eq!(net.l().col(c), encode_state(&next).index());
            }
            for r in &rules.state {
                prop_assert!(parse_expression(r).is_ok());
            }
        }
    }
}
