use std::fmt;

use crate::algebra::Rational;
use crate::{Error, Result};

/// Index into a [`Vocabulary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredId(pub usize);

/// The two canonical logical variables. The parser renames every bound
/// variable onto these.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

impl Var {
    pub fn other(self) -> Var {
        match self {
            Var::X => Var::Y,
            Var::Y => Var::X,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredDecl {
    pub name: String,
    pub arity: u8,
}

/// Declared predicate symbols; names are unique, arities are 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Vocabulary {
    preds: Vec<PredDecl>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Vocabulary::default()
    }

    pub fn declare(&mut self, name: &str, arity: u8) -> Result<PredId> {
        if !(1..=2).contains(&arity) {
            return Err(Error::Invalid(format!(
                "predicate {name} has arity {arity}; only arity 1 or 2 is supported"
            )));
        }
        if let Some(id) = self.lookup(name) {
            if self.arity(id) != arity {
                return Err(Error::Invalid(format!(
                    "predicate {name} used with arity {arity} but declared with arity {}",
                    self.arity(id)
                )));
            }
            return Ok(id);
        }
        self.preds.push(PredDecl {
            name: name.to_string(),
            arity,
        });
        Ok(PredId(self.preds.len() - 1))
    }

    /// Declares `name` if free, else `name2`, `name3`, ... Used for fresh
    /// Skolem and reduction predicates; deterministic.
    pub fn declare_fresh(&mut self, base: &str, arity: u8) -> PredId {
        if self.lookup(base).is_none() {
            return self.declare(base, arity).expect("arity in range");
        }
        let mut i = 2usize;
        loop {
            let candidate = format!("{base}{i}");
            if self.lookup(&candidate).is_none() {
                return self.declare(&candidate, arity).expect("arity in range");
            }
            i += 1;
        }
    }

    pub fn lookup(&self, name: &str) -> Option<PredId> {
        self.preds.iter().position(|p| p.name == name).map(PredId)
    }

    pub fn name(&self, id: PredId) -> &str {
        &self.preds[id.0].name
    }

    pub fn arity(&self, id: PredId) -> u8 {
        self.preds[id.0].arity
    }

    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = PredId> {
        (0..self.preds.len()).map(PredId)
    }

    /// Number of ground atoms of `id` over a domain of size n.
    pub fn ground_atoms(&self, id: PredId, n: usize) -> usize {
        match self.arity(id) {
            1 => n,
            _ => n * n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Args {
    One(Var),
    Two(Var, Var),
}

impl Args {
    pub fn arity(self) -> u8 {
        match self {
            Args::One(_) => 1,
            Args::Two(..) => 2,
        }
    }

    pub fn substitute(self, from: Var, to: Var) -> Args {
        let map = |v: Var| if v == from { to } else { v };
        match self {
            Args::One(a) => Args::One(map(a)),
            Args::Two(a, b) => Args::Two(map(a), map(b)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Comparator::Le => write!(f, "<="),
            Comparator::Eq => write!(f, "="),
            Comparator::Ge => write!(f, ">="),
        }
    }
}

/// Function-free, constant-free formula over the canonical variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    Atom { pred: PredId, args: Args },
    Equality(Var, Var),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(Var, Box<Formula>),
    Exists(Var, Box<Formula>),
    CountExists(Comparator, u32, Var, Box<Formula>),
}

impl Formula {
    pub fn atom1(pred: PredId, v: Var) -> Formula {
        Formula::Atom {
            pred,
            args: Args::One(v),
        }
    }

    pub fn atom2(pred: PredId, a: Var, b: Var) -> Formula {
        Formula::Atom {
            pred,
            args: Args::Two(a, b),
        }
    }

    pub fn not(self) -> Formula {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, rhs: Formula) -> Formula {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Formula) -> Formula {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn iff(self, rhs: Formula) -> Formula {
        Formula::Iff(Box::new(self), Box::new(rhs))
    }

    pub fn forall(v: Var, body: Formula) -> Formula {
        Formula::Forall(v, Box::new(body))
    }

    pub fn exists(v: Var, body: Formula) -> Formula {
        Formula::Exists(v, Box::new(body))
    }

    pub fn count_exists(cmp: Comparator, k: u32, v: Var, body: Formula) -> Formula {
        Formula::CountExists(cmp, k, v, Box::new(body))
    }

    /// Conjunction of a non-empty list.
    pub fn conjoin(parts: Vec<Formula>) -> Formula {
        let mut it = parts.into_iter();
        let first = it.next().expect("conjoin of empty list");
        it.fold(first, |acc, f| acc.and(f))
    }

    /// Free variables (canonical AST never has more than {x, y}).
    pub fn free_vars(&self) -> Vec<Var> {
        fn walk(f: &Formula, bound: &mut Vec<Var>, out: &mut Vec<Var>) {
            match f {
                Formula::Atom { args, .. } => {
                    let mut push = |v: Var| {
                        if !bound.contains(&v) && !out.contains(&v) {
                            out.push(v);
                        }
                    };
                    match args {
                        Args::One(a) => push(*a),
                        Args::Two(a, b) => {
                            push(*a);
                            push(*b);
                        }
                    }
                }
                Formula::Equality(a, b) => {
                    for v in [*a, *b] {
                        if !bound.contains(&v) && !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
                Formula::Not(g) => walk(g, bound, out),
                Formula::And(a, b)
                | Formula::Or(a, b)
                | Formula::Implies(a, b)
                | Formula::Iff(a, b) => {
                    walk(a, bound, out);
                    walk(b, bound, out);
                }
                Formula::Forall(v, g) | Formula::Exists(v, g) => {
                    bound.push(*v);
                    walk(g, bound, out);
                    bound.pop();
                }
                Formula::CountExists(_, _, v, g) => {
                    bound.push(*v);
                    walk(g, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// Substitutes a free variable by another, leaving bound occurrences alone.
    pub fn substitute(&self, from: Var, to: Var) -> Formula {
        match self {
            Formula::Atom { pred, args } => Formula::Atom {
                pred: *pred,
                args: args.substitute(from, to),
            },
            Formula::Equality(a, b) => {
                let map = |v: Var| if v == from { to } else { v };
                Formula::Equality(map(*a), map(*b))
            }
            Formula::Not(g) => g.substitute(from, to).not(),
            Formula::And(a, b) => a.substitute(from, to).and(b.substitute(from, to)),
            Formula::Or(a, b) => a.substitute(from, to).or(b.substitute(from, to)),
            Formula::Implies(a, b) => a.substitute(from, to).implies(b.substitute(from, to)),
            Formula::Iff(a, b) => a.substitute(from, to).iff(b.substitute(from, to)),
            Formula::Forall(v, g) if *v != from => {
                Formula::forall(*v, g.substitute(from, to))
            }
            Formula::Exists(v, g) if *v != from => {
                Formula::exists(*v, g.substitute(from, to))
            }
            Formula::CountExists(c, k, v, g) if *v != from => {
                Formula::count_exists(*c, *k, *v, g.substitute(from, to))
            }
            shadowed => shadowed.clone(),
        }
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Atom { .. } | Formula::Equality(..) => false,
            Formula::Not(g) => g.has_quantifier(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.has_quantifier() || b.has_quantifier(),
            Formula::Forall(..) | Formula::Exists(..) | Formula::CountExists(..) => true,
        }
    }

    /// All predicates occurring in the formula.
    pub fn predicates(&self, out: &mut Vec<PredId>) {
        match self {
            Formula::Atom { pred, .. } => {
                if !out.contains(pred) {
                    out.push(*pred);
                }
            }
            Formula::Equality(..) => {}
            Formula::Not(g) => g.predicates(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.predicates(out);
                b.predicates(out);
            }
            Formula::Forall(_, g) | Formula::Exists(_, g) | Formula::CountExists(_, _, _, g) => {
                g.predicates(out)
            }
        }
    }
}

/// Affine bound `a*n + b*m + c` appearing in cardinality constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundExpr {
    pub n_coeff: i64,
    pub m_coeff: i64,
    pub constant: i64,
}

impl BoundExpr {
    pub fn constant(c: i64) -> Self {
        BoundExpr {
            n_coeff: 0,
            m_coeff: 0,
            constant: c,
        }
    }

    pub fn eval(&self, n: usize, m: Option<i64>) -> Result<usize> {
        let m_val = if self.m_coeff != 0 {
            m.ok_or_else(|| {
                Error::Invalid("bound uses parameter m but no `param m = <int>` given".to_string())
            })?
        } else {
            0
        };
        let v = self.n_coeff * n as i64 + self.m_coeff * m_val + self.constant;
        if v < 0 {
            return Err(Error::Infeasible(format!(
                "cardinality bound {self} evaluates to {v} < 0 at n = {n}"
            )));
        }
        Ok(v as usize)
    }
}

impl fmt::Display for BoundExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.n_coeff != 0 {
            parts.push(if self.n_coeff == 1 {
                "n".to_string()
            } else {
                format!("{}n", self.n_coeff)
            });
        }
        if self.m_coeff != 0 {
            let t = if self.m_coeff == 1 {
                "m".to_string()
            } else {
                format!("{}m", self.m_coeff)
            };
            parts.push(if parts.is_empty() || self.m_coeff < 0 {
                t
            } else {
                format!("+{t}")
            });
        }
        if self.constant != 0 || parts.is_empty() {
            let t = format!("{}", self.constant);
            parts.push(if parts.is_empty() || self.constant < 0 {
                t
            } else {
                format!("+{t}")
            });
        }
        write!(f, "{}", parts.concat())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityConstraint {
    pub pred: PredId,
    pub cmp: Comparator,
    pub bound: BoundExpr,
}

/// Positive/negative weight of a predicate: an exact rational or a named
/// symbolic variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WeightVal {
    Rat(Rational),
    Sym(String),
}

impl WeightVal {
    pub fn one() -> Self {
        WeightVal::Rat(Rational::from_integer(1.into()))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, WeightVal::Rat(r) if *r == Rational::from_integer(1.into()))
    }
}

impl fmt::Display for WeightVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightVal::Rat(r) => write!(f, "{r}"),
            WeightVal::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// Per-predicate weight pairs (w, wbar); defaults to (1, 1).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Weights {
    by_pred: Vec<(WeightVal, WeightVal)>,
}

impl Weights {
    pub fn get(&self, id: PredId) -> (WeightVal, WeightVal) {
        self.by_pred
            .get(id.0)
            .cloned()
            .unwrap_or((WeightVal::one(), WeightVal::one()))
    }

    pub fn set(&mut self, id: PredId, pos: WeightVal, neg: WeightVal) {
        if self.by_pred.len() <= id.0 {
            self.by_pred
                .resize(id.0 + 1, (WeightVal::one(), WeightVal::one()));
        }
        self.by_pred[id.0] = (pos, neg);
    }

    pub fn is_default(&self, id: PredId) -> bool {
        let (p, n) = self.get(id);
        p.is_one() && n.is_one()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Axioms {
    /// Designated linear order predicate, if the linear order axiom is on.
    pub linear: Option<PredId>,
    /// Immediate-predecessor axiom (requires linear).
    pub pred: bool,
    /// Predecessor-of-predecessor axiom (requires linear).
    pub pred2: bool,
}

/// A parsed, validated counting problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub vocab: Vocabulary,
    /// Implicit conjunction.
    pub sentences: Vec<Formula>,
    pub constraints: Vec<CardinalityConstraint>,
    pub axioms: Axioms,
    pub weights: Weights,
    pub domain_size: usize,
    pub param_m: Option<i64>,
}

impl Problem {
    pub fn new(n: usize) -> Self {
        Problem {
            vocab: Vocabulary::new(),
            sentences: Vec::new(),
            constraints: Vec::new(),
            axioms: Axioms::default(),
            weights: Weights::default(),
            domain_size: n,
            param_m: None,
        }
    }
}
