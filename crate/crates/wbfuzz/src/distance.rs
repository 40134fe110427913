//! Branch distances and their scaling into heuristic values.
//!
//! Every function here is pure. A [`Distance`] of zero means the predicate
//! under guidance holds; a [`HeuristicValue`] of one means the testing target
//! is covered. Non-finite inputs never propagate: they collapse to
//! [`MAX_DISTANCE`].

use std::cell::RefCell;
use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::{Error, Result};

/// Ceiling used for unsatisfiable or non-finite cases (2^31).
pub const MAX_DISTANCE: f64 = 2_147_483_648.0;

/// Default base constant `b` of the scaling formula.
pub const DEFAULT_BASE: f64 = 0.1;

/// Span of the printable-ASCII alphabet; the per-missing-character penalty
/// in string distances.
pub const ALPHABET_SPAN: f64 = 95.0;

/// Non-negative branch distance; zero iff the guarded predicate holds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Distance(f64);

impl Distance {
    pub const ZERO: Distance = Distance(0.0);
    pub const MAX: Distance = Distance(MAX_DISTANCE);

    /// Clamps into `[0, MAX_DISTANCE]`; NaN and infinities become the max.
    pub fn new(d: f64) -> Distance {
        if !d.is_finite() {
            return Distance::MAX;
        }
        Distance(d.clamp(0.0, MAX_DISTANCE))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }
}

/// Heuristic value in `[0, 1]`; one iff the distance was zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HeuristicValue(f64);

impl HeuristicValue {
    pub const COVERED: HeuristicValue = HeuristicValue(1.0);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_covered(self) -> bool {
        self.0 == 1.0
    }
}

/// h = b + (1 - b) / (1 + d), strictly decreasing in d with range (b, 1].
pub fn scale(d: Distance, b: f64) -> Result<HeuristicValue> {
    if !(0.0..1.0).contains(&b) || b == 0.0 {
        return Err(Error::config(format!(
            "heuristic base must be in (0, 1), got {b}"
        )));
    }
    Ok(HeuristicValue(b + (1.0 - b) / (1.0 + d.0)))
}

/// `scale` with the default base, for call sites that already validated it.
pub fn scale_default(d: Distance) -> HeuristicValue {
    scale(d, DEFAULT_BASE).expect("default base is valid")
}

pub fn numeric_eq_distance(a: f64, b: f64) -> Distance {
    if !a.is_finite() || !b.is_finite() {
        return Distance::MAX;
    }
    Distance::new((a - b).abs())
}

/// Character-wise distance over the left-aligned overlap plus a flat
/// [`ALPHABET_SPAN`] penalty per missing character, so converging prefixes
/// rank ahead of unrelated strings of the same length.
pub fn string_eq_distance(s: &str, t: &str) -> Distance {
    let a: Vec<char> = s.chars().collect();
    let b: Vec<char> = t.chars().collect();
    let overlap = a.len().min(b.len());
    let mut d = 0.0;
    for i in 0..overlap {
        d += (a[i] as i64 - b[i] as i64).abs() as f64;
    }
    d += (a.len().abs_diff(b.len())) as f64 * ALPHABET_SPAN;
    Distance::new(d)
}

/// Element of a collection for which a distance can be computed. Unsupported
/// runtime types degrade to 0/1 equality.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Num(f64),
    Text(String),
    Bool(bool),
    Opaque(String),
}

impl Element {
    pub fn from_json(v: &Value) -> Element {
        match v {
            Value::Number(n) => Element::Num(n.as_f64().unwrap_or(f64::NAN)),
            Value::String(s) => Element::Text(s.clone()),
            Value::Bool(b) => Element::Bool(*b),
            other => Element::Opaque(other.to_string()),
        }
    }
}

pub fn element_distance(a: &Element, b: &Element) -> Distance {
    match (a, b) {
        (Element::Num(x), Element::Num(y)) => numeric_eq_distance(*x, *y),
        (Element::Text(x), Element::Text(y)) => string_eq_distance(x, y),
        (Element::Bool(x), Element::Bool(y)) => {
            if x == y {
                Distance::ZERO
            } else {
                Distance::new(1.0)
            }
        }
        (x, y) => {
            if x == y {
                Distance::ZERO
            } else {
                Distance::new(1.0)
            }
        }
    }
}

/// d_c(e, X) = min over x in X of d(x, e); empty collections are maximal.
pub fn contains_distance(e: &Element, xs: &[Element]) -> Distance {
    xs.iter()
        .map(|x| element_distance(x, e))
        .min_by(|a, b| a.partial_cmp(b).expect("distances are finite"))
        .unwrap_or(Distance::MAX)
}

/// Conjunction form of containsAll: sum of per-element contains distances,
/// zero exactly when every element of `ys` is present in `xs`.
pub fn contains_all_distance(ys: &[Element], xs: &[Element]) -> Distance {
    let mut total = 0.0;
    for y in ys {
        total += contains_distance(y, xs).value();
    }
    Distance::new(total)
}

/// h_a(Y, X) = sum of h_c(y, X) / (|Y| + ln |Y|). Growing |Y| is penalized by
/// the ln term. An empty `ys` bypasses the formula: containsAll on an empty
/// argument is vacuously true, so it scores 1.
pub fn contains_all_heuristic(ys: &[Element], xs: &[Element], b: f64) -> Result<HeuristicValue> {
    if ys.is_empty() {
        return Ok(HeuristicValue::COVERED);
    }
    let mut sum = 0.0;
    for y in ys {
        sum += scale(contains_distance(y, xs), b)?.value();
    }
    let n = ys.len() as f64;
    let h = sum / (n + n.ln());
    Ok(HeuristicValue(h.clamp(0.0, 1.0)))
}

/// d(A and B) = d(A) + d(B); empty input is trivially satisfied.
pub fn conjunction(ds: &[Distance]) -> Distance {
    Distance::new(ds.iter().map(|d| d.value()).sum())
}

/// d(A or B) = min(d(A), d(B)); empty input is unsatisfiable.
pub fn disjunction(ds: &[Distance]) -> Distance {
    ds.iter()
        .copied()
        .min_by(|a, b| a.partial_cmp(b).expect("distances are finite"))
        .unwrap_or(Distance::MAX)
}

/// Field-level validation constraint, mirroring the common bean-validation
/// annotation set. `Future`/`Past` and `Custom` are carried so harnesses can
/// enforce them, but no distance is defined for them.
#[derive(Debug, Clone, PartialEq)]
pub enum ValidationConstraint {
    Min(f64),
    Max(f64),
    Positive,
    PositiveOrZero,
    Negative,
    NegativeOrZero,
    /// Bounds on the length of a string or the size of an array.
    Size { min: Option<u64>, max: Option<u64> },
    NotEmpty,
    NotBlank,
    Null,
    NotNull,
    AssertTrue,
    AssertFalse,
    Pattern(String),
    EnumMembership(Vec<String>),
    /// NOT NULL implied by a primitive field type rather than an annotation.
    ImpliedNotNull,
    /// Time-related constraint; enforceable as a boolean, no distance.
    Future(String),
    /// Time-related constraint; enforceable as a boolean, no distance.
    Past(String),
    /// User-defined constraint; never has a distance.
    Custom(String),
}

impl ValidationConstraint {
    pub fn name(&self) -> &'static str {
        match self {
            ValidationConstraint::Min(_) => "Min",
            ValidationConstraint::Max(_) => "Max",
            ValidationConstraint::Positive => "Positive",
            ValidationConstraint::PositiveOrZero => "PositiveOrZero",
            ValidationConstraint::Negative => "Negative",
            ValidationConstraint::NegativeOrZero => "NegativeOrZero",
            ValidationConstraint::Size { .. } => "Size",
            ValidationConstraint::NotEmpty => "NotEmpty",
            ValidationConstraint::NotBlank => "NotBlank",
            ValidationConstraint::Null => "Null",
            ValidationConstraint::NotNull => "NotNull",
            ValidationConstraint::AssertTrue => "AssertTrue",
            ValidationConstraint::AssertFalse => "AssertFalse",
            ValidationConstraint::Pattern(_) => "Pattern",
            ValidationConstraint::EnumMembership(_) => "EnumMembership",
            ValidationConstraint::ImpliedNotNull => "ImpliedNotNull",
            ValidationConstraint::Future(_) => "Future",
            ValidationConstraint::Past(_) => "Past",
            ValidationConstraint::Custom(_) => "Custom",
        }
    }

    /// Boolean evaluation, defined for every kind (including the ones with no
    /// distance). Bean-validation semantics: constraints other than the null
    /// checks accept null values.
    pub fn is_satisfied(&self, v: &Value) -> bool {
        use ValidationConstraint::*;
        match self {
            Null => v.is_null(),
            NotNull | ImpliedNotNull => !v.is_null(),
            _ if v.is_null() => true,
            Min(k) => as_num(v).map(|x| x >= *k).unwrap_or(false),
            Max(k) => as_num(v).map(|x| x <= *k).unwrap_or(false),
            Positive => as_num(v).map(|x| x > 0.0).unwrap_or(false),
            PositiveOrZero => as_num(v).map(|x| x >= 0.0).unwrap_or(false),
            Negative => as_num(v).map(|x| x < 0.0).unwrap_or(false),
            NegativeOrZero => as_num(v).map(|x| x <= 0.0).unwrap_or(false),
            Size { min, max } => match size_of(v) {
                Some(n) => min.map(|m| n >= m).unwrap_or(true) && max.map(|m| n <= m).unwrap_or(true),
                None => false,
            },
            NotEmpty => size_of(v).map(|n| n > 0).unwrap_or(false),
            NotBlank => v
                .as_str()
                .map(|s| !s.trim().is_empty())
                .unwrap_or(false),
            AssertTrue => v.as_bool() == Some(true),
            AssertFalse => v.as_bool() == Some(false),
            Pattern(p) => v.as_str().map(|s| pattern_matches(p, s)).unwrap_or(false),
            EnumMembership(values) => v
                .as_str()
                .map(|s| values.iter().any(|x| x == s))
                .unwrap_or(false),
            Future(reference) => v.as_str().map(|s| s > reference.as_str()).unwrap_or(false),
            Past(reference) => v.as_str().map(|s| s < reference.as_str()).unwrap_or(false),
            Custom(_) => true,
        }
    }
}

fn as_num(v: &Value) -> Option<f64> {
    v.as_f64()
}

fn size_of(v: &Value) -> Option<u64> {
    match v {
        Value::String(s) => Some(s.chars().count() as u64),
        Value::Array(a) => Some(a.len() as u64),
        Value::Object(o) => Some(o.len() as u64),
        _ => None,
    }
}

// Compiled-pattern cache; constraint evaluation sits on the fitness hot path.
thread_local! {
    static PATTERN_CACHE: RefCell<BTreeMap<String, Option<regex::Regex>>> =
        RefCell::new(BTreeMap::new());
}

/// Full-string match, like bean validation's `Matcher.matches()`.
pub fn pattern_matches(pattern: &str, s: &str) -> bool {
    PATTERN_CACHE.with(|c| {
        let mut cache = c.borrow_mut();
        let compiled = cache
            .entry(pattern.to_string())
            .or_insert_with(|| regex::Regex::new(&format!("^(?:{pattern})$")).ok());
        compiled.as_ref().map(|re| re.is_match(s)).unwrap_or(false)
    })
}

/// Distances toward satisfying (`d_valid`) and violating (`d_invalid`) a
/// constraint. Exactly one of the two is zero for any supported pair.
/// Strict boundaries carry the classic +1 offset so the two zero-sets never
/// overlap.
pub fn constraint_distance(
    c: &ValidationConstraint,
    v: &Value,
) -> Result<(Distance, Distance)> {
    use ValidationConstraint::*;

    match c {
        Future(_) | Past(_) | Custom(_) => {
            return Err(Error::UnsupportedConstraint(c.name().to_string()))
        }
        _ => {}
    }

    // Null handling first: only the null checks reject null values.
    if v.is_null() {
        let (dv, di) = match c {
            Null => (0.0, 1.0),
            NotNull | ImpliedNotNull => (1.0, 0.0),
            _ => (0.0, 1.0),
        };
        return Ok((Distance::new(dv), Distance::new(di)));
    }

    let (d_valid, d_invalid) = match c {
        Null => (1.0, 0.0),
        NotNull | ImpliedNotNull => (0.0, 1.0),
        Min(k) => numeric(v, |x| ge_distances(x, *k)),
        Max(k) => numeric(v, |x| le_distances(x, *k)),
        Positive => numeric(v, |x| gt_distances(x, 0.0)),
        PositiveOrZero => numeric(v, |x| ge_distances(x, 0.0)),
        Negative => numeric(v, |x| lt_distances(x, 0.0)),
        NegativeOrZero => numeric(v, |x| le_distances(x, 0.0)),
        Size { min, max } => size_distances(v, *min, *max),
        NotEmpty => match size_of(v) {
            Some(0) => (1.0, 0.0),
            Some(n) => (0.0, n as f64),
            None => (MAX_DISTANCE, 0.0),
        },
        NotBlank => match v.as_str() {
            Some(s) => {
                let solid = s.chars().filter(|c| !c.is_whitespace()).count();
                if solid == 0 {
                    (1.0, 0.0)
                } else {
                    (0.0, solid as f64)
                }
            }
            None => (MAX_DISTANCE, 0.0),
        },
        AssertTrue => bool_distances(v, true),
        AssertFalse => bool_distances(v, false),
        Pattern(p) => match v.as_str() {
            // Flat 0/1: a graded version would need automata distances, and
            // taint specialization is the intended solver.
            Some(s) => {
                if pattern_matches(p, s) {
                    (0.0, 1.0)
                } else {
                    (1.0, 0.0)
                }
            }
            None => (MAX_DISTANCE, 0.0),
        },
        EnumMembership(values) => match v.as_str() {
            Some(s) => {
                let elems: Vec<Element> =
                    values.iter().map(|x| Element::Text(x.clone())).collect();
                let d = contains_distance(&Element::Text(s.to_string()), &elems);
                if d.is_zero() {
                    (0.0, 1.0)
                } else {
                    (d.value(), 0.0)
                }
            }
            None => (MAX_DISTANCE, 0.0),
        },
        Future(_) | Past(_) | Custom(_) => unreachable!("rejected above"),
    };

    Ok((Distance::new(d_valid), Distance::new(d_invalid)))
}

// A non-numeric (or non-finite) value can never satisfy a numeric clause.
fn numeric(v: &Value, f: impl Fn(f64) -> (f64, f64)) -> (f64, f64) {
    match as_num(v) {
        Some(x) if x.is_finite() => f(x),
        _ => (MAX_DISTANCE, 0.0),
    }
}

// v >= k
fn ge_distances(v: f64, k: f64) -> (f64, f64) {
    if v >= k {
        (0.0, v - k + 1.0)
    } else {
        (k - v, 0.0)
    }
}

// v <= k
fn le_distances(v: f64, k: f64) -> (f64, f64) {
    if v <= k {
        (0.0, k - v + 1.0)
    } else {
        (v - k, 0.0)
    }
}

// v > k
fn gt_distances(v: f64, k: f64) -> (f64, f64) {
    if v > k {
        (0.0, v - k)
    } else {
        (k - v + 1.0, 0.0)
    }
}

// v < k
fn lt_distances(v: f64, k: f64) -> (f64, f64) {
    if v < k {
        (0.0, k - v)
    } else {
        (v - k + 1.0, 0.0)
    }
}

fn bool_distances(v: &Value, expected: bool) -> (f64, f64) {
    match v.as_bool() {
        Some(b) if b == expected => (0.0, 1.0),
        Some(_) => (1.0, 0.0),
        None => (MAX_DISTANCE, 0.0),
    }
}

fn size_distances(v: &Value, min: Option<u64>, max: Option<u64>) -> (f64, f64) {
    let Some(n) = size_of(v) else {
        return (MAX_DISTANCE, 0.0);
    };
    let n = n as f64;
    let below = min.map(|m| m as f64 - n).unwrap_or(f64::NEG_INFINITY);
    let above = max.map(|m| n - m as f64).unwrap_or(f64::NEG_INFINITY);
    if below <= 0.0 && above <= 0.0 {
        // Satisfied; distance to violation is the cheaper escape from the
        // window, if one exists.
        let mut escapes = Vec::new();
        if let Some(m) = min {
            if m > 0 {
                escapes.push(n - (m as f64 - 1.0));
            }
        }
        if let Some(m) = max {
            escapes.push((m as f64 + 1.0) - n);
        }
        let d_inv = escapes
            .into_iter()
            .fold(MAX_DISTANCE, f64::min)
            .max(0.0);
        (0.0, d_inv)
    } else {
        (below.max(above), 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn scale_formula_fixed_points() {
        assert_eq!(scale(Distance::ZERO, 0.1).unwrap().value(), 1.0);
        // 0.1 + 0.9/2
        assert!((scale(Distance::new(1.0), 0.1).unwrap().value() - 0.55).abs() < 1e-12);
        let large = scale(Distance::new(1e9), 0.1).unwrap().value();
        assert!(large > 0.1 && large < 0.1 + 1e-8);
    }

    #[test]
    fn scale_strictly_decreasing() {
        let ds = [0.0, 0.5, 1.0, 10.0, 1000.0];
        let hs: Vec<f64> = ds
            .iter()
            .map(|&d| scale(Distance::new(d), 0.1).unwrap().value())
            .collect();
        for w in hs.windows(2) {
            assert!(w[0] > w[1], "scale not strictly decreasing: {hs:?}");
        }
    }

    #[test]
    fn scale_rejects_bad_base() {
        assert!(scale(Distance::ZERO, 0.0).is_err());
        assert!(scale(Distance::ZERO, 1.0).is_err());
        assert!(scale(Distance::ZERO, -0.3).is_err());
    }

    #[test]
    fn numeric_distance_hand_values() {
        assert_eq!(numeric_eq_distance(5.0, 5.0).value(), 0.0);
        assert_eq!(numeric_eq_distance(3.0, 10.0).value(), 7.0);
        assert_eq!(numeric_eq_distance(-2.0, 2.0).value(), 4.0);
        assert_eq!(numeric_eq_distance(f64::NAN, 1.0), Distance::MAX);
        assert_eq!(numeric_eq_distance(f64::INFINITY, 1.0), Distance::MAX);
    }

    #[test]
    fn string_distance_ordering() {
        assert_eq!(string_eq_distance("Hello", "Hello").value(), 0.0);
        let closer = string_eq_distance("ello", "Hello");
        let farther = string_eq_distance("foo", "Hello");
        assert!(closer.value() > 0.0);
        assert!(closer < farther, "{closer:?} vs {farther:?}");
        assert!(string_eq_distance("", "a").value() > 0.0);
    }

    #[test]
    fn contains_hand_values() {
        let xs: Vec<Element> = [1.0, 5.0, 9.0].iter().map(|&x| Element::Num(x)).collect();
        assert_eq!(contains_distance(&Element::Num(5.0), &xs).value(), 0.0);
        let xs2: Vec<Element> = [1.0, 9.0].iter().map(|&x| Element::Num(x)).collect();
        // min(|1-5|, |9-5|)
        assert_eq!(contains_distance(&Element::Num(5.0), &xs2).value(), 4.0);
        assert_eq!(
            contains_distance(&Element::Text("a".into()), &[]),
            Distance::MAX
        );
    }

    #[test]
    fn contains_all_heuristic_hand_values() {
        // Empty Y is vacuously contained.
        assert_eq!(
            contains_all_heuristic(&[], &[], 0.1).unwrap().value(),
            1.0
        );
        let xs = vec![Element::Num(5.0)];
        let y1 = vec![Element::Num(5.0)];
        assert_eq!(contains_all_heuristic(&y1, &xs, 0.1).unwrap().value(), 1.0);
        // (1 + scale(4)) / (2 + ln 2) = 1.28 / 2.6931...
        let y2 = vec![Element::Num(5.0), Element::Num(9.0)];
        let h = contains_all_heuristic(&y2, &xs, 0.1).unwrap().value();
        let expected = (1.0 + (0.1 + 0.9 / 5.0)) / (2.0 + 2f64.ln());
        assert!((h - expected).abs() < 1e-12);
        assert!((h - 0.475).abs() < 1e-3);
    }

    #[test]
    fn conjunction_disjunction_hand_values() {
        let d = |x: f64| Distance::new(x);
        assert_eq!(conjunction(&[d(0.0), d(0.0)]).value(), 0.0);
        assert_eq!(conjunction(&[d(2.0), d(3.0)]).value(), 5.0);
        assert_eq!(disjunction(&[d(2.0), d(3.0)]).value(), 2.0);
        assert_eq!(conjunction(&[]).value(), 0.0);
        assert_eq!(disjunction(&[]), Distance::MAX);
    }

    #[test]
    fn constraint_hand_values() {
        let (dv, di) =
            constraint_distance(&ValidationConstraint::Min(5.0), &json!(3)).unwrap();
        assert_eq!(dv.value(), 2.0);
        assert_eq!(di.value(), 0.0);

        let (dv, di) =
            constraint_distance(&ValidationConstraint::NotNull, &Value::Null).unwrap();
        assert_eq!(dv.value(), 1.0);
        assert_eq!(di.value(), 0.0);

        let (dv, _) = constraint_distance(
            &ValidationConstraint::Pattern("[a-z]+".into()),
            &json!("abc"),
        )
        .unwrap();
        assert_eq!(dv.value(), 0.0);
    }

    #[test]
    fn unsupported_constraints_error() {
        for c in [
            ValidationConstraint::Future("2030-01-01".into()),
            ValidationConstraint::Past("2020-01-01".into()),
            ValidationConstraint::Custom("checksum".into()),
        ] {
            assert!(matches!(
                constraint_distance(&c, &json!("x")),
                Err(Error::UnsupportedConstraint(_))
            ));
        }
    }

    #[test]
    fn pattern_is_full_match() {
        assert!(pattern_matches("[a-z]+", "abc"));
        assert!(!pattern_matches("[a-z]+", "abc1"));
        assert!(!pattern_matches("[a-z]+", ""));
    }

    /// Exactly one of (d_valid, d_invalid) is zero across a sweep of
    /// supported constraint/value pairs.
    #[test]
    fn exactly_one_side_zero() {
        let constraints = vec![
            ValidationConstraint::Min(5.0),
            ValidationConstraint::Max(10.0),
            ValidationConstraint::Positive,
            ValidationConstraint::PositiveOrZero,
            ValidationConstraint::Negative,
            ValidationConstraint::NegativeOrZero,
            ValidationConstraint::Size {
                min: Some(2),
                max: Some(4),
            },
            ValidationConstraint::Size {
                min: None,
                max: Some(3),
            },
            ValidationConstraint::NotEmpty,
            ValidationConstraint::NotBlank,
            ValidationConstraint::Null,
            ValidationConstraint::NotNull,
            ValidationConstraint::ImpliedNotNull,
            ValidationConstraint::AssertTrue,
            ValidationConstraint::AssertFalse,
            ValidationConstraint::Pattern("[A-Z]{2}".into()),
            ValidationConstraint::EnumMembership(vec!["TEST".into(), "EVENT".into()]),
        ];
        let values = vec![
            Value::Null,
            json!(-7),
            json!(0),
            json!(3),
            json!(5),
            json!(10),
            json!(11),
            json!(true),
            json!(false),
            json!(""),
            json!("   "),
            json!("ab"),
            json!("ABCDE"),
            json!("TEST"),
            json!("EVENT"),
            json!("XY"),
            json!(["a"]),
            json!([]),
        ];
        for c in &constraints {
            for v in &values {
                let (dv, di) = constraint_distance(c, v).unwrap();
                assert!(
                    dv.is_zero() ^ di.is_zero(),
                    "constraint {c:?} on {v:?}: dv={dv:?} di={di:?}"
                );
                // The zero side must agree with the boolean evaluation.
                assert_eq!(
                    c.is_satisfied(v),
                    dv.is_zero(),
                    "boolean/distance disagreement for {c:?} on {v:?}"
                );
            }
        }
    }
}
