//! An exhaustive-search CNF to d-DNNF compiler.
//!
//! [`compile`] turns a CNF formula into an equivalent [`Ddnnf`] by recursive
//! case analysis:
//!
//! 1. unit clauses are propagated and emitted as literal conjuncts;
//! 2. clause sets that share no variables split into independent components,
//!    joined by a decomposable And;
//! 3. otherwise the most frequent variable (smallest id on ties) is branched
//!    on, producing a deterministic `Or(And(v, ...), And(not v, ...))`.
//!
//! Subproblems are memoized on their canonical clause set and structurally
//! identical nodes are shared, so the result is a DAG. The compiler polls a
//! [`Limits`] value: it stops with [`Error::BudgetExhausted`] or
//! [`Error::DeadlineExceeded`] instead of running away on hard inputs.

use std::collections::HashMap;

use crate::cnf::{CnfFormula, Lit, VarId};
use crate::ddnnf::{Ddnnf, DdnnfNode, DeterminismProvenance, NodeId};
use crate::limits::Limits;
use crate::Result;

/// Clauses are sorted DIMACS literal lists; the clause list itself is kept
/// sorted and deduplicated so it can serve as a memoization key.
type Clauses = Vec<Vec<i64>>;

/// Compiles a CNF formula into an equivalent d-DNNF over the same variables.
pub fn compile(cnf: &CnfFormula, limits: &Limits) -> Result<Ddnnf> {
    let mut clauses: Clauses = Vec::with_capacity(cnf.clauses().len());
    for clause in cnf.clauses() {
        let mut lits: Vec<i64> = clause.iter().map(|l| l.to_dimacs()).collect();
        lits.sort_by_key(|l| (l.unsigned_abs(), *l));
        lits.dedup();
        let tautological = lits
            .windows(2)
            .any(|w| w[0].unsigned_abs() == w[1].unsigned_abs());
        if !tautological {
            clauses.push(lits);
        }
    }

    let mut builder = Builder {
        nodes: Vec::new(),
        index: HashMap::new(),
        memo: HashMap::new(),
        limits,
        created: 0,
    };
    let root = builder.solve(clauses)?;
    Ddnnf::new(
        builder.nodes,
        root,
        cnf.num_vars(),
        cnf.var_map().clone(),
        DeterminismProvenance::TrustedByConstruction,
    )
}

/// Canonical shape of a node, used for structural sharing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum NodeKey {
    Lit(i64),
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
    True,
    False,
}

struct Builder<'a> {
    nodes: Vec<DdnnfNode>,
    index: HashMap<NodeKey, NodeId>,
    memo: HashMap<Clauses, NodeId>,
    limits: &'a Limits,
    created: u64,
}

impl Builder<'_> {
    fn intern(&mut self, key: NodeKey) -> Result<NodeId> {
        if let Some(&id) = self.index.get(&key) {
            return Ok(id);
        }
        self.created += 1;
        self.limits.check_nodes(self.created)?;
        let node = match &key {
            NodeKey::Lit(l) => DdnnfNode::Lit(lit_from_dimacs(*l)),
            NodeKey::And(cs) => DdnnfNode::And(cs.clone()),
            NodeKey::Or(cs) => DdnnfNode::Or(cs.clone()),
            NodeKey::True => DdnnfNode::True,
            NodeKey::False => DdnnfNode::False,
        };
        self.nodes.push(node);
        let id = NodeId(self.nodes.len() - 1);
        self.index.insert(key, id);
        Ok(id)
    }

    fn mk_true(&mut self) -> Result<NodeId> {
        self.intern(NodeKey::True)
    }

    fn mk_false(&mut self) -> Result<NodeId> {
        self.intern(NodeKey::False)
    }

    fn mk_lit(&mut self, l: i64) -> Result<NodeId> {
        self.intern(NodeKey::Lit(l))
    }

    /// Conjunction with constant folding and one level of flattening. The
    /// callers only combine children over disjoint variables.
    fn mk_and(&mut self, children: Vec<NodeId>) -> Result<NodeId> {
        let mut flat: Vec<NodeId> = Vec::with_capacity(children.len());
        for c in children {
            match &self.nodes[c.0] {
                DdnnfNode::False => return self.mk_false(),
                DdnnfNode::True => {}
                DdnnfNode::And(inner) => flat.extend(inner.iter().copied()),
                _ => flat.push(c),
            }
        }
        flat.sort_unstable();
        flat.dedup();
        match flat.len() {
            0 => self.mk_true(),
            1 => Ok(flat[0]),
            _ => self.intern(NodeKey::And(flat)),
        }
    }

    /// Disjunction with constant folding. The callers only combine children
    /// that force complementary literals, so determinism is preserved.
    fn mk_or(&mut self, children: Vec<NodeId>) -> Result<NodeId> {
        let mut kept: Vec<NodeId> = children
            .into_iter()
            .filter(|c| !matches!(self.nodes[c.0], DdnnfNode::False))
            .collect();
        kept.sort_unstable();
        kept.dedup();
        match kept.len() {
            0 => self.mk_false(),
            1 => Ok(kept[0]),
            _ => self.intern(NodeKey::Or(kept)),
        }
    }

    fn solve(&mut self, mut clauses: Clauses) -> Result<NodeId> {
        self.limits.check_deadline()?;
        clauses.sort_unstable();
        clauses.dedup();
        if let Some(&hit) = self.memo.get(&clauses) {
            return Ok(hit);
        }
        let key = clauses.clone();
        let result = self.solve_canonical(clauses)?;
        self.memo.insert(key, result);
        Ok(result)
    }

    fn solve_canonical(&mut self, mut clauses: Clauses) -> Result<NodeId> {
        if clauses.iter().any(|c| c.is_empty()) {
            return self.mk_false();
        }
        if clauses.is_empty() {
            return self.mk_true();
        }

        // Unit propagation: forced literals become conjuncts of the result.
        let mut forced: Vec<i64> = Vec::new();
        while let Some(&unit) = clauses.iter().find(|c| c.len() == 1).map(|c| &c[0]) {
            forced.push(unit);
            clauses = assign(&clauses, unit);
            if clauses.iter().any(|c| c.is_empty()) {
                return self.mk_false();
            }
        }
        if !forced.is_empty() {
            let mut children = Vec::with_capacity(forced.len() + 1);
            for l in forced {
                children.push(self.mk_lit(l)?);
            }
            let rest = self.solve(clauses)?;
            children.push(rest);
            return self.mk_and(children);
        }

        // Independent components share no variables and compile separately
        // under a decomposable And.
        let components = split_components(&clauses);
        if components.len() > 1 {
            let mut children = Vec::with_capacity(components.len());
            for component in components {
                children.push(self.solve(component)?);
            }
            return self.mk_and(children);
        }

        // Branch on the most frequent variable, smallest id on ties. Both
        // cofactors keep the decision literal, which makes the Or
        // deterministic.
        let v = branch_variable(&clauses);
        let pos = self.solve(assign(&clauses, v))?;
        let neg = self.solve(assign(&clauses, -v))?;
        let lit_pos = self.mk_lit(v)?;
        let lit_neg = self.mk_lit(-v)?;
        let child_pos = self.mk_and(vec![lit_pos, pos])?;
        let child_neg = self.mk_and(vec![lit_neg, neg])?;
        self.mk_or(vec![child_pos, child_neg])
    }
}

fn lit_from_dimacs(l: i64) -> Lit {
    let var = VarId(l.unsigned_abs() as u32);
    if l > 0 {
        Lit::pos(var)
    } else {
        Lit::neg(var)
    }
}

/// Conditions the clause set on `lit`: satisfied clauses disappear, the
/// complementary literal is removed (possibly emptying a clause).
fn assign(clauses: &Clauses, lit: i64) -> Clauses {
    let mut out = Vec::with_capacity(clauses.len());
    for clause in clauses {
        if clause.contains(&lit) {
            continue;
        }
        if clause.contains(&-lit) {
            out.push(clause.iter().copied().filter(|&l| l != -lit).collect());
        } else {
            out.push(clause.clone());
        }
    }
    out
}

/// Groups clauses into variable-connected components, ordered by their
/// smallest variable so compilation is deterministic.
fn split_components(clauses: &Clauses) -> Vec<Clauses> {
    let n = clauses.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    let mut owner: HashMap<u64, usize> = HashMap::new();
    for (i, clause) in clauses.iter().enumerate() {
        for l in clause {
            let var = l.unsigned_abs();
            match owner.get(&var) {
                Some(&j) => {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
                None => {
                    owner.insert(var, i);
                }
            }
        }
    }
    let mut groups: HashMap<usize, Clauses> = HashMap::new();
    for (i, clause) in clauses.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(clause.clone());
    }
    let mut components: Vec<Clauses> = groups.into_values().collect();
    components.sort_by_key(|c| c[0][0].unsigned_abs());
    components
}

/// Most frequent variable, smallest id on ties.
fn branch_variable(clauses: &Clauses) -> i64 {
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for clause in clauses {
        for l in clause {
            *counts.entry(l.unsigned_abs()).or_insert(0) += 1;
        }
    }
    let (&var, _) = counts
        .iter()
        .max_by(|(v1, c1), (v2, c2)| c1.cmp(c2).then(v2.cmp(v1)))
        .expect("branching requires a nonempty clause set");
    var as i64
}
