//! Value domains, the product operator and per-variable aggregates.
//!
//! A [`SemiringContext`] bundles a carrier set, the product `⊗`, its
//! identities and the named aggregates a query may use. All arithmetic is
//! exact: integers and rationals are arbitrary precision.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{FaqError, Result};

/// Names of the contexts shipped with the engine.
pub const CONTEXT_NAMES: [&str; 5] = [
    "bool-or-and",
    "nat-sum-prod",
    "rat-sum-prod",
    "max-prod",
    "max-plus",
];

/// A point of some carrier set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Int(BigInt),
    Rat(BigRational),
    /// Rational extended with −∞ (`None`).
    Ext(Option<BigRational>),
}

impl Value {
    pub fn int(v: i64) -> Value {
        Value::Int(BigInt::from(v))
    }

    pub fn rat(numer: i64, denom: i64) -> Value {
        Value::Rat(BigRational::new(numer.into(), denom.into()))
    }

    pub fn ext(numer: i64, denom: i64) -> Value {
        Value::Ext(Some(BigRational::new(numer.into(), denom.into())))
    }

    pub const NEG_INF: Value = Value::Ext(None);

    fn cmp_same(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Rat(a), Value::Rat(b)) => a.cmp(b),
            (Value::Ext(a), Value::Ext(b)) => match (a, b) {
                (None, None) => Ordering::Equal,
                (None, Some(_)) => Ordering::Less,
                (Some(_), None) => Ordering::Greater,
                (Some(a), Some(b)) => a.cmp(b),
            },
            _ => panic!("comparing values of different carriers: {self:?} vs {other:?}"),
        }
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{}", u8::from(*b)),
            Value::Int(i) => write!(f, "{i}"),
            Value::Rat(r) => fmt_rational(r, f),
            Value::Ext(None) => write!(f, "-inf"),
            Value::Ext(Some(r)) => fmt_rational(r, f),
        }
    }
}

/// The carrier set `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Carrier {
    Bool,
    /// Nonnegative integers.
    Nat,
    Int,
    Rat,
    NonNegRat,
    /// Rationals with −∞ adjoined.
    ExtRat,
}

impl Carrier {
    pub fn name(self) -> &'static str {
        match self {
            Carrier::Bool => "boolean",
            Carrier::Nat => "natural",
            Carrier::Int => "integer",
            Carrier::Rat => "rational",
            Carrier::NonNegRat => "nonnegative rational",
            Carrier::ExtRat => "extended rational",
        }
    }

    pub fn contains(self, v: &Value) -> bool {
        match (self, v) {
            (Carrier::Bool, Value::Bool(_)) => true,
            (Carrier::Nat, Value::Int(i)) => !i.is_negative(),
            (Carrier::Int, Value::Int(_)) => true,
            (Carrier::Rat, Value::Rat(_)) => true,
            (Carrier::NonNegRat, Value::Rat(r)) => !r.is_negative(),
            (Carrier::ExtRat, Value::Ext(_)) => true,
            _ => false,
        }
    }

    /// Parses a textual value. Rationals accept `p`, `p/q` and decimals.
    pub fn parse(self, text: &str) -> Result<Value> {
        let text = text.trim();
        let outside = || FaqError::ValueOutsideCarrier {
            value: text.to_string(),
            carrier: self.name().to_string(),
        };
        let value = match self {
            Carrier::Bool => match text {
                "0" | "false" => Value::Bool(false),
                "1" | "true" => Value::Bool(true),
                _ => return Err(outside()),
            },
            Carrier::Nat | Carrier::Int => {
                Value::Int(text.parse::<BigInt>().map_err(|_| outside())?)
            }
            Carrier::Rat | Carrier::NonNegRat => {
                Value::Rat(parse_rational(text).ok_or_else(outside)?)
            }
            Carrier::ExtRat => match text {
                "-inf" | "-infinity" => Value::Ext(None),
                _ => Value::Ext(Some(parse_rational(text).ok_or_else(outside)?)),
            },
        };
        if self.contains(&value) {
            Ok(value)
        } else {
            Err(outside())
        }
    }

    /// Small exhaustive grid used by the axiom checker.
    pub fn grid(self) -> Vec<Value> {
        match self {
            Carrier::Bool => vec![Value::Bool(false), Value::Bool(true)],
            Carrier::Nat => (0..4).chain([5]).map(Value::int).collect(),
            Carrier::Int => [-2, -1, 0, 1, 2, 3].into_iter().map(Value::int).collect(),
            Carrier::Rat => [(-1, 1), (0, 1), (1, 2), (1, 1), (2, 1), (-3, 2)]
                .into_iter()
                .map(|(p, q)| Value::rat(p, q))
                .collect(),
            Carrier::NonNegRat => [(0, 1), (1, 3), (1, 2), (1, 1), (2, 1), (5, 2)]
                .into_iter()
                .map(|(p, q)| Value::rat(p, q))
                .collect(),
            Carrier::ExtRat => std::iter::once(Value::NEG_INF)
                .chain([(-1, 1), (0, 1), (1, 2), (1, 1), (3, 1)].map(|(p, q)| Value::ext(p, q)))
                .collect(),
        }
    }

    pub fn sample<R: Rng>(self, rng: &mut R) -> Value {
        let small_rat = |rng: &mut R, signed: bool| {
            let lo = if signed { -20 } else { 0 };
            BigRational::new(rng.gen_range(lo..=20).into(), rng.gen_range(1..=6).into())
        };
        match self {
            Carrier::Bool => Value::Bool(rng.gen()),
            Carrier::Nat => Value::int(rng.gen_range(0..=50)),
            Carrier::Int => Value::int(rng.gen_range(-50..=50)),
            Carrier::Rat => Value::Rat(small_rat(rng, true)),
            Carrier::NonNegRat => Value::Rat(small_rat(rng, false)),
            Carrier::ExtRat => {
                if rng.gen_ratio(1, 8) {
                    Value::NEG_INF
                } else {
                    Value::Ext(Some(small_rat(rng, true)))
                }
            }
        }
    }
}

fn parse_rational(text: &str) -> Option<BigRational> {
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let frac: BigInt = frac.parse().ok()?;
        let magnitude = int.abs() * &scale + frac;
        let numer = if negative { -magnitude } else { magnitude };
        return Some(BigRational::new(numer, scale));
    }
    Some(BigRational::from_integer(text.parse().ok()?))
}

/// A binary operation on a carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Or,
    And,
    Add,
    Mul,
    Max,
}

impl Op {
    pub fn symbol(self) -> &'static str {
        match self {
            Op::Or => "∨",
            Op::And => "∧",
            Op::Add => "+",
            Op::Mul => "×",
            Op::Max => "max",
        }
    }

    pub fn supports(self, carrier: Carrier) -> bool {
        match self {
            Op::Or | Op::And => carrier == Carrier::Bool,
            Op::Add => carrier != Carrier::Bool,
            Op::Mul => !matches!(carrier, Carrier::Bool | Carrier::ExtRat),
            Op::Max => true,
        }
    }

    /// Identity element, where one exists on the carrier.
    pub fn identity(self, carrier: Carrier) -> Option<Value> {
        if !self.supports(carrier) {
            return None;
        }
        Some(match (self, carrier) {
            (Op::Or, _) => Value::Bool(false),
            (Op::And, _) => Value::Bool(true),
            (Op::Max, Carrier::Bool) => Value::Bool(false),
            (Op::Max, Carrier::Nat) => Value::int(0),
            (Op::Max, Carrier::NonNegRat) => Value::rat(0, 1),
            (Op::Max, Carrier::ExtRat) => Value::NEG_INF,
            (Op::Max, _) => return None,
            (Op::Add, Carrier::ExtRat) => Value::ext(0, 1),
            (Op::Add, Carrier::Nat | Carrier::Int) => Value::int(0),
            (Op::Add, _) => Value::rat(0, 1),
            (Op::Mul, Carrier::Nat | Carrier::Int) => Value::int(1),
            (Op::Mul, _) => Value::rat(1, 1),
        })
    }

    /// Applies the operation. Both operands must belong to a carrier the
    /// operation supports.
    pub fn apply(self, a: &Value, b: &Value) -> Value {
        match (self, a, b) {
            (Op::Or, Value::Bool(x), Value::Bool(y)) => Value::Bool(*x || *y),
            (Op::And, Value::Bool(x), Value::Bool(y)) => Value::Bool(*x && *y),
            (Op::Max, _, _) => {
                if a.cmp_same(b) == Ordering::Less {
                    b.clone()
                } else {
                    a.clone()
                }
            }
            (Op::Add, Value::Int(x), Value::Int(y)) => Value::Int(x + y),
            (Op::Add, Value::Rat(x), Value::Rat(y)) => Value::Rat(x + y),
            (Op::Add, Value::Ext(x), Value::Ext(y)) => match (x, y) {
                (Some(x), Some(y)) => Value::Ext(Some(x + y)),
                _ => Value::NEG_INF,
            },
            (Op::Mul, Value::Int(x), Value::Int(y)) => Value::Int(x * y),
            (Op::Mul, Value::Rat(x), Value::Rat(y)) => Value::Rat(x * y),
            _ => panic!("{self:?} is undefined on {a:?}, {b:?}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AggregateKind {
    /// `⊕` forms a commutative semiring with `⊗`.
    Semiring,
    /// `⊕ = ⊗`.
    Product,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Aggregate {
    pub name: String,
    pub op: Op,
    pub kind: AggregateKind,
}

impl Aggregate {
    pub fn is_product(&self) -> bool {
        self.kind == AggregateKind::Product
    }

    pub fn is_semiring(&self) -> bool {
        self.kind == AggregateKind::Semiring
    }
}

/// Values on which `v ⊗ v = v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Idempotence {
    All,
    Values(Vec<Value>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiringContext {
    pub name: String,
    pub carrier: Carrier,
    pub product: Op,
    pub zero: Value,
    pub one: Value,
    pub aggregates: Vec<Aggregate>,
    pub idempotent: Idempotence,
}

impl SemiringContext {
    /// Looks up one of the shipped contexts by name.
    pub fn named(name: &str) -> Result<SemiringContext> {
        use AggregateKind::{Product, Semiring};
        let agg = |name: &str, op, kind| Aggregate {
            name: name.to_string(),
            op,
            kind,
        };
        let zero_one = |carrier| {
            Idempotence::Values(vec![
                Op::Add.identity(carrier).unwrap(),
                Op::Mul.identity(carrier).unwrap(),
            ])
        };
        let (carrier, product, aggregates, idempotent) = match name {
            "bool-or-and" => (
                Carrier::Bool,
                Op::And,
                vec![agg("or", Op::Or, Semiring), agg("and", Op::And, Product)],
                Idempotence::All,
            ),
            "nat-sum-prod" => (
                Carrier::Nat,
                Op::Mul,
                vec![
                    agg("sum", Op::Add, Semiring),
                    agg("max", Op::Max, Semiring),
                    agg("prod", Op::Mul, Product),
                ],
                zero_one(Carrier::Nat),
            ),
            "rat-sum-prod" => (
                Carrier::Rat,
                Op::Mul,
                vec![agg("sum", Op::Add, Semiring), agg("prod", Op::Mul, Product)],
                zero_one(Carrier::Rat),
            ),
            "max-prod" => (
                Carrier::NonNegRat,
                Op::Mul,
                vec![
                    agg("max", Op::Max, Semiring),
                    agg("sum", Op::Add, Semiring),
                    agg("prod", Op::Mul, Product),
                ],
                zero_one(Carrier::NonNegRat),
            ),
            "max-plus" => (
                Carrier::ExtRat,
                Op::Add,
                vec![agg("max", Op::Max, Semiring), agg("prod", Op::Add, Product)],
                Idempotence::Values(vec![Value::NEG_INF, Value::ext(0, 1)]),
            ),
            _ => return Err(FaqError::UnknownContext(name.to_string())),
        };
        let zero = aggregates[0].op.identity(carrier).unwrap();
        let one = product.identity(carrier).unwrap();
        Ok(SemiringContext {
            name: name.to_string(),
            carrier,
            product,
            zero,
            one,
            aggregates,
            idempotent,
        })
    }

    /// Builds an arbitrary context without checking any axiom; useful for
    /// exercising [`check_semiring_axioms`] on non-semirings.
    pub fn custom(
        name: &str,
        carrier: Carrier,
        product: Op,
        zero: Value,
        one: Value,
        aggregates: Vec<Aggregate>,
    ) -> SemiringContext {
        SemiringContext {
            name: name.to_string(),
            carrier,
            product,
            zero,
            one,
            aggregates,
            idempotent: Idempotence::Values(vec![]),
        }
    }

    pub fn aggregate(&self, name: &str) -> Result<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.name == name)
            .ok_or_else(|| FaqError::UnknownAggregate {
                name: name.to_string(),
                context: self.name.clone(),
            })
    }

    pub fn is_zero(&self, v: &Value) -> bool {
        *v == self.zero
    }

    pub fn mul(&self, a: &Value, b: &Value) -> Value {
        self.product.apply(a, b)
    }

    pub fn is_product_idempotent(&self, v: &Value) -> bool {
        match &self.idempotent {
            Idempotence::All => true,
            Idempotence::Values(vs) => vs.contains(v),
        }
    }

    pub fn parse_value(&self, text: &str) -> Result<Value> {
        self.carrier.parse(text)
    }
}

/// `v` raised to the `k`-th `⊗`-power, with the idempotence shortcut.
pub fn value_power(ctx: &SemiringContext, v: &Value, k: u64) -> Value {
    value_power_with(ctx, v, k, true)
}

/// Repeated squaring; `shortcut` returns idempotent values unchanged.
pub fn value_power_with(ctx: &SemiringContext, v: &Value, k: u64, shortcut: bool) -> Value {
    if k == 0 {
        return ctx.one.clone();
    }
    if shortcut && ctx.is_product_idempotent(v) {
        return v.clone();
    }
    let mut result = ctx.one.clone();
    let mut base = v.clone();
    let mut exp = k;
    loop {
        if exp & 1 == 1 {
            result = ctx.mul(&result, &base);
        }
        exp >>= 1;
        if exp == 0 {
            return result;
        }
        base = ctx.mul(&base, &base);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    AdditiveCommutativity,
    AdditiveAssociativity,
    AdditiveIdentity,
    MultiplicativeCommutativity,
    MultiplicativeAssociativity,
    MultiplicativeIdentity,
    Distributivity,
    Annihilation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomViolation {
    pub aggregate: String,
    pub axiom: Axiom,
    /// The `(a, b, c)` triple that broke the axiom; unary axioms only use `a`.
    pub witness: [Value; 3],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomReport {
    Pass,
    Violation(Box<AxiomViolation>),
}

/// Checks the commutative-semiring axioms for every semiring aggregate of
/// the context on an exhaustive small grid followed by `sample_budget`
/// seeded random triples.
pub fn check_semiring_axioms(
    ctx: &SemiringContext,
    sample_budget: usize,
    seed: u64,
) -> Result<AxiomReport> {
    if sample_budget == 0 {
        return Err(FaqError::Internal("sample budget must be at least 1".into()));
    }
    let unsupported = |op: Op| {
        FaqError::UnsupportedCarrier(format!("{} does not support {:?}", ctx.carrier.name(), op))
    };
    if !ctx.product.supports(ctx.carrier) {
        return Err(unsupported(ctx.product));
    }
    let grid = ctx.carrier.grid();
    let mut triples: Vec<[Value; 3]> = Vec::with_capacity(grid.len().pow(3) + sample_budget);
    for a in &grid {
        for b in &grid {
            for c in &grid {
                triples.push([a.clone(), b.clone(), c.clone()]);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..sample_budget {
        let mut draw = || ctx.carrier.sample(&mut rng);
        triples.push([draw(), draw(), draw()]);
    }

    let mul = |a: &Value, b: &Value| ctx.product.apply(a, b);
    for agg in ctx.aggregates.iter().filter(|a| a.is_semiring()) {
        if !agg.op.supports(ctx.carrier) {
            return Err(unsupported(agg.op));
        }
        let add = |a: &Value, b: &Value| agg.op.apply(a, b);
        type Check<'a> = Box<dyn Fn(&Value, &Value, &Value) -> bool + 'a>;
        let checks: [(Axiom, Check); 8] = [
            (Axiom::AdditiveCommutativity, Box::new(|a, b, _| add(a, b) == add(b, a))),
            (
                Axiom::AdditiveAssociativity,
                Box::new(|a, b, c| add(&add(a, b), c) == add(a, &add(b, c))),
            ),
            (Axiom::AdditiveIdentity, Box::new(|a, _, _| add(a, &ctx.zero) == *a)),
            (Axiom::MultiplicativeCommutativity, Box::new(|a, b, _| mul(a, b) == mul(b, a))),
            (
                Axiom::MultiplicativeAssociativity,
                Box::new(|a, b, c| mul(&mul(a, b), c) == mul(a, &mul(b, c))),
            ),
            (Axiom::MultiplicativeIdentity, Box::new(|a, _, _| mul(a, &ctx.one) == *a)),
            (
                Axiom::Distributivity,
                Box::new(|a, b, c| mul(a, &add(b, c)) == add(&mul(a, b), &mul(a, c))),
            ),
            (
                Axiom::Annihilation,
                Box::new(|a, _, _| mul(a, &ctx.zero) == ctx.zero && mul(&ctx.zero, a) == ctx.zero),
            ),
        ];
        for (axiom, holds) in &checks {
            if let Some(t) = triples.iter().find(|[a, b, c]| !holds(a, b, c)) {
                return Ok(AxiomReport::Violation(Box::new(AxiomViolation {
                    aggregate: agg.name.clone(),
                    axiom: *axiom,
                    witness: t.clone(),
                })));
            }
        }
    }
    Ok(AxiomReport::Pass)
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl Value {
    /// Convenience for tests and generators: the integer `n` in `carrier`.
    pub fn from_i64(carrier: Carrier, n: i64) -> Value {
        match carrier {
            Carrier::Bool => Value::Bool(n != 0),
            Carrier::Nat | Carrier::Int => Value::int(n),
            Carrier::Rat | Carrier::NonNegRat => Value::rat(n, 1),
            Carrier::ExtRat => Value::ext(n, 1),
        }
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Value::Bool(b) => Some(if *b { BigRational::one() } else { BigRational::zero() }),
            Value::Int(i) => Some(BigRational::from_integer(i.clone())),
            Value::Rat(r) => Some(r.clone()),
            Value::Ext(r) => r.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(name: &str) -> SemiringContext {
        SemiringContext::named(name).unwrap()
    }

    #[test]
    fn shipped_contexts_pass_axioms() {
        for name in CONTEXT_NAMES {
            assert_eq!(
                check_semiring_axioms(&ctx(name), 100, 7).unwrap(),
                AxiomReport::Pass,
                "{name}"
            );
        }
    }

    #[test]
    fn boolean_semiring_passes() {
        let c = ctx("bool-or-and");
        assert_eq!(check_semiring_axioms(&c, 100, 1).unwrap(), AxiomReport::Pass);
    }

    #[test]
    fn max_times_on_nonnegative_rationals_passes() {
        let c = SemiringContext::custom(
            "max-times",
            Carrier::NonNegRat,
            Op::Mul,
            Value::rat(0, 1),
            Value::rat(1, 1),
            vec![Aggregate { name: "max".into(), op: Op::Max, kind: AggregateKind::Semiring }],
        );
        assert_eq!(check_semiring_axioms(&c, 100, 3).unwrap(), AxiomReport::Pass);
    }

    #[test]
    fn exhaustive_distributivity_counterexample_for_sum_max() {
        // Oracle: scan {0,1,2}^3 for the first distributivity failure of ⊕=+, ⊗=max.
        let mut first = None;
        'outer: for a in 0..3i64 {
            for b in 0..3i64 {
                for c in 0..3i64 {
                    if a.max(b + c) != a.max(b) + a.max(c) {
                        first = Some((a, b, c));
                        break 'outer;
                    }
                }
            }
        }
        assert_eq!(first, Some((1, 0, 0)));

        let c = SemiringContext::custom(
            "nat-sum-max",
            Carrier::Nat,
            Op::Max,
            Value::int(0),
            Value::int(0),
            vec![Aggregate { name: "sum".into(), op: Op::Add, kind: AggregateKind::Semiring }],
        );
        match check_semiring_axioms(&c, 100, 5).unwrap() {
            AxiomReport::Violation(v) => {
                assert_eq!(v.axiom, Axiom::Distributivity);
                assert_eq!(v.witness, [Value::int(1), Value::int(0), Value::int(0)]);
            }
            AxiomReport::Pass => panic!("sum/max is not a semiring"),
        }
    }

    #[test]
    fn unsupported_operation_is_reported() {
        let c = SemiringContext::custom(
            "broken",
            Carrier::ExtRat,
            Op::Mul,
            Value::NEG_INF,
            Value::ext(1, 1),
            vec![],
        );
        assert!(matches!(
            check_semiring_axioms(&c, 10, 0),
            Err(FaqError::UnsupportedCarrier(_))
        ));
    }

    #[test]
    fn axiom_check_is_deterministic() {
        let c = SemiringContext::custom(
            "int-max-mul",
            Carrier::Int,
            Op::Mul,
            Value::int(0),
            Value::int(1),
            vec![Aggregate { name: "max".into(), op: Op::Max, kind: AggregateKind::Semiring }],
        );
        let a = check_semiring_axioms(&c, 50, 11).unwrap();
        let b = check_semiring_axioms(&c, 50, 11).unwrap();
        assert_eq!(a, b);
        assert!(matches!(a, AxiomReport::Violation(_)));
    }

    #[test]
    fn power_examples() {
        let c = ctx("rat-sum-prod");
        assert_eq!(value_power(&c, &Value::rat(2, 1), 10), Value::rat(1024, 1));
        assert_eq!(value_power(&c, &Value::rat(7, 1), 0), Value::rat(1, 1));
        let n = ctx("nat-sum-prod");
        assert_eq!(value_power(&n, &Value::int(2), 10), Value::int(1024));
        let mp = ctx("max-plus");
        assert_eq!(value_power(&mp, &Value::ext(5, 1), 3), Value::ext(15, 1));
        assert_eq!(value_power(&mp, &Value::NEG_INF, 3), Value::NEG_INF);
        let b = ctx("bool-or-and");
        assert_eq!(value_power(&b, &Value::Bool(true), 0), Value::Bool(true));
        assert_eq!(value_power(&b, &Value::Bool(false), 9), Value::Bool(false));
    }

    #[test]
    fn power_matches_naive_fold() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for name in CONTEXT_NAMES {
            let c = ctx(name);
            for _ in 0..10 {
                let v = c.carrier.sample(&mut rng);
                let mut naive = c.one.clone();
                for k in 0..=64u64 {
                    assert_eq!(value_power(&c, &v, k), naive, "{name} {v} ^ {k}");
                    assert_eq!(value_power_with(&c, &v, k, false), naive);
                    naive = c.mul(&naive, &v);
                }
            }
        }
    }

    #[test]
    fn parse_values() {
        assert_eq!(Carrier::Rat.parse("3/6").unwrap(), Value::rat(1, 2));
        assert_eq!(Carrier::Rat.parse("-0.25").unwrap(), Value::rat(-1, 4));
        assert_eq!(Carrier::ExtRat.parse("-inf").unwrap(), Value::NEG_INF);
        assert_eq!(Carrier::Bool.parse("true").unwrap(), Value::Bool(true));
        assert!(Carrier::Bool.parse("2").is_err());
        assert!(Carrier::Nat.parse("-1").is_err());
        assert!(Carrier::NonNegRat.parse("-1/2").is_err());
        assert!(Carrier::Rat.parse("1/0").is_err());
        assert_eq!(Value::rat(6, 4).to_string(), "3/2");
        assert_eq!(Value::rat(-4, 2).to_string(), "-2");
    }
}
