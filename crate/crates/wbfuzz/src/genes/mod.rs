//! Genotype representation: constrained sampling, mutation, and phenotype
//! rendering for every input the search can evolve.
//!
//! Genes are values; mutation clones and modifies. Rendering is a pure
//! function of the genotype, so a test case replays to the same request
//! bytes every time.

pub mod uri;

use rand::Rng as _;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::regexgen;
use crate::taint::SpecializationKind;
use crate::Rng;

pub use uri::{HostGene, UriGene, UriVariant};

/// Default cap for free-form string genes when no schema constraint applies.
pub const DEFAULT_MAX_LEN: usize = 64;

const MUTATION_RETRIES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Charset {
    /// Printable ASCII, 0x20..=0x7E.
    Printable,
    /// Lowercase letters and digits.
    LowerAlnum,
}

impl Charset {
    pub fn sample(self, rng: &mut Rng) -> char {
        match self {
            Charset::Printable => (0x20u8 + rng.random_range(0..95u8)) as char,
            Charset::LowerAlnum => {
                let i = rng.random_range(0..36u8);
                if i < 26 {
                    (b'a' + i) as char
                } else {
                    (b'0' + (i - 26)) as char
                }
            }
        }
    }

    pub fn contains(self, c: char) -> bool {
        match self {
            Charset::Printable => ('\x20'..='\x7e').contains(&c),
            Charset::LowerAlnum => c.is_ascii_lowercase() || c.is_ascii_digit(),
        }
    }
}

/// Shape from which genes are sampled; carried by action templates.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneTemplate {
    Integer {
        min: i64,
        max: i64,
    },
    Long,
    Float {
        min: f64,
        max: f64,
    },
    Boolean,
    Text {
        max_len: usize,
        charset: Charset,
        /// Schema `pattern` constraints become an active regex
        /// specialization at build time.
        pattern: Option<String>,
    },
    Enum {
        values: Vec<String>,
    },
    Choice {
        children: Vec<GeneTemplate>,
    },
    Object {
        fields: Vec<FieldTemplate>,
    },
    Optional {
        child: Box<GeneTemplate>,
    },
    Uuid,
    Uri,
    Array {
        item: Box<GeneTemplate>,
        min_items: usize,
        max_items: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldTemplate {
    pub name: String,
    pub template: GeneTemplate,
    pub required: bool,
}

impl GeneTemplate {
    pub fn text_default() -> GeneTemplate {
        GeneTemplate::Text {
            max_len: DEFAULT_MAX_LEN,
            charset: Charset::Printable,
            pattern: None,
        }
    }

    /// Rejects inconsistent bounds before any sampling happens.
    pub fn validate(&self) -> Result<()> {
        match self {
            GeneTemplate::Integer { min, max } if min > max => Err(Error::config(format!(
                "integer template bounds inverted: [{min}, {max}]"
            ))),
            GeneTemplate::Float { min, max } if !(min <= max) => Err(Error::config(format!(
                "float template bounds inverted: [{min}, {max}]"
            ))),
            GeneTemplate::Enum { values } if values.is_empty() => {
                Err(Error::config("enum template needs at least one value"))
            }
            GeneTemplate::Choice { children } => {
                if children.is_empty() {
                    return Err(Error::config("choice template needs at least one child"));
                }
                children.iter().try_for_each(|c| c.validate())
            }
            GeneTemplate::Object { fields } => {
                fields.iter().try_for_each(|f| f.template.validate())
            }
            GeneTemplate::Optional { child } => child.validate(),
            GeneTemplate::Array {
                item,
                min_items,
                max_items,
            } => {
                if min_items > max_items {
                    return Err(Error::config(format!(
                        "array template bounds inverted: [{min_items}, {max_items}]"
                    )));
                }
                item.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> Result<Gene> {
        self.validate()?;
        Ok(self.sample_unchecked(rng))
    }

    fn sample_unchecked(&self, rng: &mut Rng) -> Gene {
        match self {
            GeneTemplate::Integer { min, max } => Gene::Integer {
                value: rng.random_range(*min..=*max),
                min: *min,
                max: *max,
            },
            GeneTemplate::Long => Gene::Long {
                value: sample_long(rng),
            },
            GeneTemplate::Float { min, max } => Gene::Float {
                value: sample_float_in(rng, *min, *max),
                min: *min,
                max: *max,
            },
            GeneTemplate::Boolean => Gene::Boolean {
                value: rng.random_bool(0.5),
            },
            GeneTemplate::Text {
                max_len,
                charset,
                pattern,
            } => {
                let mut g = StringGene::sample(rng, *max_len, *charset);
                if let Some(p) = pattern {
                    if g.add_specialization(SpecializationKind::RegexMatch(p.clone()), rng) {
                        g.active = Some(g.specializations.len() - 1);
                    }
                }
                Gene::Text(g)
            }
            GeneTemplate::Enum { values } => Gene::Enum {
                values: values.clone(),
                active: rng.random_range(0..values.len()),
            },
            GeneTemplate::Choice { children } => {
                let sampled: Vec<Gene> =
                    children.iter().map(|c| c.sample_unchecked(rng)).collect();
                let active = rng.random_range(0..sampled.len());
                Gene::Choice {
                    children: sampled,
                    active,
                }
            }
            GeneTemplate::Object { fields } => Gene::Object {
                fields: fields
                    .iter()
                    .map(|f| {
                        let gene = if f.required {
                            f.template.sample_unchecked(rng)
                        } else {
                            Gene::Optional {
                                child: Box::new(f.template.sample_unchecked(rng)),
                                present: rng.random_bool(0.5),
                            }
                        };
                        (f.name.clone(), gene)
                    })
                    .collect(),
            },
            GeneTemplate::Optional { child } => Gene::Optional {
                child: Box::new(child.sample_unchecked(rng)),
                present: rng.random_bool(0.5),
            },
            GeneTemplate::Uuid => Gene::Uuid {
                hi: rng.random::<i64>(),
                lo: rng.random::<i64>(),
            },
            GeneTemplate::Uri => Gene::Uri(UriGene::sample(rng)),
            GeneTemplate::Array {
                item,
                min_items,
                max_items,
            } => {
                let span = (*max_items).min(min_items + 3);
                let n = rng.random_range(*min_items..=span);
                Gene::Array {
                    item: item.clone(),
                    elements: (0..n).map(|_| item.sample_unchecked(rng)).collect(),
                    min_items: *min_items,
                    max_items: *max_items,
                }
            }
        }
    }
}

/// One learned specialization attached to a string gene, together with its
/// evolvable state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecChild {
    pub kind: SpecializationKind,
    pub state: SpecState,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecState {
    Constant,
    Prefix { suffix: String },
    Regex { node: regexgen::Node, text: String },
    EnumIdx(usize),
    Integer(i64),
    Float(f64),
    Uuid { hi: i64, lo: i64 },
    Uri(Box<UriGene>),
}

/// Free-form string plus any specializations learned through taint
/// sightings. Acts as a choice gene: `active == None` renders the free
/// value, `Some(i)` renders specialization `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StringGene {
    pub value: String,
    pub max_len: usize,
    pub charset: Charset,
    pub specializations: Vec<SpecChild>,
    pub active: Option<usize>,
}

impl StringGene {
    pub fn new(value: impl Into<String>, max_len: usize, charset: Charset) -> StringGene {
        StringGene {
            value: value.into(),
            max_len,
            charset,
            specializations: Vec::new(),
            active: None,
        }
    }

    fn sample(rng: &mut Rng, max_len: usize, charset: Charset) -> StringGene {
        let len = rng.random_range(0..=max_len.min(12));
        let value: String = (0..len).map(|_| charset.sample(rng)).collect();
        StringGene::new(value, max_len, charset)
    }

    /// Overwrites the free-form value (used for tainting) and deactivates any
    /// specialization so the marker actually reaches the wire.
    pub fn set_free_value(&mut self, value: String) {
        self.value = value;
        self.active = None;
    }

    /// Adds a specialization child unless an equal one is already attached.
    /// Returns false when the kind cannot be instantiated (e.g. an
    /// unparseable regex).
    pub fn add_specialization(&mut self, kind: SpecializationKind, rng: &mut Rng) -> bool {
        if self.specializations.iter().any(|s| s.kind == kind) {
            return false;
        }
        let state = match &kind {
            SpecializationKind::ConstantEquals(_) => SpecState::Constant,
            SpecializationKind::ConstantPrefix(_) => SpecState::Prefix {
                suffix: String::new(),
            },
            SpecializationKind::RegexMatch(pattern) => match regexgen::parse(pattern) {
                Ok(node) => {
                    let text = regexgen::sample(&node, rng);
                    SpecState::Regex { node, text }
                }
                Err(_) => return false,
            },
            SpecializationKind::EnumMember(values) => {
                if values.is_empty() {
                    return false;
                }
                SpecState::EnumIdx(rng.random_range(0..values.len()))
            }
            SpecializationKind::IntegerFormat => SpecState::Integer(rng.random_range(-1000..=1000)),
            SpecializationKind::FloatFormat => SpecState::Float(sample_float_in(rng, -1000.0, 1000.0)),
            SpecializationKind::UuidFormat => SpecState::Uuid {
                hi: rng.random::<i64>(),
                lo: rng.random::<i64>(),
            },
            SpecializationKind::UriFormat => SpecState::Uri(Box::new(UriGene::sample(rng))),
            SpecializationKind::UrlFormat => SpecState::Uri(Box::new(UriGene::sample_web(rng))),
        };
        self.specializations.push(SpecChild { kind, state });
        true
    }

    pub fn render(&self) -> String {
        match self.active.and_then(|i| self.specializations.get(i)) {
            None => self.value.clone(),
            Some(child) => match (&child.kind, &child.state) {
                (SpecializationKind::ConstantEquals(text), _) => text.clone(),
                (SpecializationKind::ConstantPrefix(prefix), SpecState::Prefix { suffix }) => {
                    format!("{prefix}{suffix}")
                }
                (_, SpecState::Regex { text, .. }) => text.clone(),
                (SpecializationKind::EnumMember(values), SpecState::EnumIdx(i)) => {
                    values[*i % values.len()].clone()
                }
                (_, SpecState::Integer(v)) => v.to_string(),
                (_, SpecState::Float(v)) => format_float(*v),
                (_, SpecState::Uuid { hi, lo }) => uuid_text(*hi, *lo),
                (_, SpecState::Uri(u)) => u.render(),
                // Kind/state mismatch cannot be constructed through the API.
                _ => self.value.clone(),
            },
        }
    }

    fn mutate(&mut self, rng: &mut Rng) {
        // With specializations attached, sometimes flip which child renders.
        if !self.specializations.is_empty() && rng.random_bool(0.3) {
            let options = self.specializations.len() + 1;
            let pick = rng.random_range(0..options);
            let new_active = if pick == self.specializations.len() {
                None
            } else {
                Some(pick)
            };
            if new_active != self.active {
                self.active = new_active;
                return;
            }
        }
        match self.active {
            None => mutate_text(&mut self.value, self.max_len, self.charset, rng),
            Some(i) => {
                let child = &mut self.specializations[i];
                match &mut child.state {
                    SpecState::Constant => {
                        // Nothing inside a constant to evolve; drop back to
                        // the free child occasionally.
                        if rng.random_bool(0.5) {
                            self.active = None;
                        }
                    }
                    SpecState::Prefix { suffix } => {
                        mutate_text(suffix, self.max_len, self.charset, rng)
                    }
                    SpecState::Regex { node, text } => *text = regexgen::sample(node, rng),
                    SpecState::EnumIdx(idx) => {
                        if let SpecializationKind::EnumMember(values) = &child.kind {
                            if values.len() > 1 {
                                *idx = (*idx + 1 + rng.random_range(0..values.len() - 1))
                                    % values.len();
                            }
                        }
                    }
                    SpecState::Integer(v) => *v = mutate_long(*v, rng),
                    SpecState::Float(v) => {
                        *v = mutate_float(*v, f64::NEG_INFINITY, f64::INFINITY, rng)
                    }
                    SpecState::Uuid { hi, lo } => {
                        if rng.random_bool(0.5) {
                            *hi = mutate_long(*hi, rng);
                        } else {
                            *lo = mutate_long(*lo, rng);
                        }
                    }
                    SpecState::Uri(u) => u.mutate(rng),
                }
            }
        }
    }

    fn is_valid(&self) -> bool {
        if let Some(i) = self.active {
            if i >= self.specializations.len() {
                return false;
            }
        }
        self.value.chars().count() <= self.max_len
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gene {
    Integer { value: i64, min: i64, max: i64 },
    Long { value: i64 },
    Float { value: f64, min: f64, max: f64 },
    Boolean { value: bool },
    Text(StringGene),
    Enum { values: Vec<String>, active: usize },
    Choice { children: Vec<Gene>, active: usize },
    Object { fields: Vec<(String, Gene)> },
    Optional { child: Box<Gene>, present: bool },
    Uuid { hi: i64, lo: i64 },
    Uri(UriGene),
    Array {
        item: Box<GeneTemplate>,
        elements: Vec<Gene>,
        min_items: usize,
        max_items: usize,
    },
    /// Value pinned at generation time (e.g. monotone primary keys); never
    /// mutated.
    Fixed { text: String },
}

/// Segment of a path addressing a gene inside a tree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Seg {
    Field(String),
    Index(usize),
    Inner,
}

pub type GenePath = Vec<Seg>;

impl Gene {
    pub fn fixed(text: impl Into<String>) -> Gene {
        Gene::Fixed { text: text.into() }
    }

    /// Text phenotype. Deterministic given the genotype.
    pub fn render(&self) -> String {
        match self {
            Gene::Integer { value, .. } | Gene::Long { value } => value.to_string(),
            Gene::Float { value, .. } => format_float(*value),
            Gene::Boolean { value } => value.to_string(),
            Gene::Text(s) => s.render(),
            Gene::Enum { values, active } => values[*active].clone(),
            Gene::Choice { children, active } => children[*active].render(),
            Gene::Optional { child, present } => {
                if *present {
                    child.render()
                } else {
                    String::new()
                }
            }
            Gene::Uuid { hi, lo } => uuid_text(*hi, *lo),
            Gene::Uri(u) => u.render(),
            Gene::Object { .. } | Gene::Array { .. } => self.render_json().to_string(),
            Gene::Fixed { text } => text.clone(),
        }
    }

    /// Structured phenotype for body payloads. Absent optional fields are
    /// omitted entirely.
    pub fn render_json(&self) -> Value {
        match self {
            Gene::Integer { value, .. } | Gene::Long { value } => Value::from(*value),
            Gene::Float { value, .. } => {
                serde_json::Number::from_f64(*value).map(Value::Number).unwrap_or(Value::Null)
            }
            Gene::Boolean { value } => Value::Bool(*value),
            Gene::Text(s) => Value::String(s.render()),
            Gene::Enum { values, active } => Value::String(values[*active].clone()),
            Gene::Choice { children, active } => children[*active].render_json(),
            Gene::Optional { child, present } => {
                if *present {
                    child.render_json()
                } else {
                    Value::Null
                }
            }
            Gene::Uuid { .. } | Gene::Uri(_) | Gene::Fixed { .. } => Value::String(self.render()),
            Gene::Object { fields } => {
                let mut map = serde_json::Map::new();
                for (name, gene) in fields {
                    if let Gene::Optional { present: false, .. } = gene {
                        continue;
                    }
                    map.insert(name.clone(), gene.render_json());
                }
                Value::Object(map)
            }
            Gene::Array { elements, .. } => {
                Value::Array(elements.iter().map(|e| e.render_json()).collect())
            }
        }
    }

    /// Mutates in place, guaranteeing a genotype change unless the gene space
    /// is a singleton.
    pub fn mutate(&mut self, rng: &mut Rng) {
        if self.is_singleton() {
            return;
        }
        let before = self.clone();
        for _ in 0..MUTATION_RETRIES {
            self.mutate_once(rng);
            if *self != before {
                return;
            }
        }
    }

    fn is_singleton(&self) -> bool {
        match self {
            Gene::Integer { min, max, .. } => min == max,
            Gene::Enum { values, .. } => values.len() <= 1,
            Gene::Fixed { .. } => true,
            Gene::Float { min, max, .. } => min == max,
            _ => false,
        }
    }

    fn mutate_once(&mut self, rng: &mut Rng) {
        match self {
            Gene::Integer { value, min, max } => {
                *value = mutate_int_in(*value, *min, *max, rng);
            }
            Gene::Long { value } => *value = mutate_long(*value, rng),
            Gene::Float { value, min, max } => {
                *value = mutate_float(*value, *min, *max, rng);
            }
            Gene::Boolean { value } => *value = !*value,
            Gene::Text(s) => s.mutate(rng),
            Gene::Enum { values, active } => {
                if values.len() > 1 {
                    *active = (*active + 1 + rng.random_range(0..values.len() - 1)) % values.len();
                }
            }
            Gene::Choice { children, active } => {
                if children.len() > 1 && rng.random_bool(0.3) {
                    *active =
                        (*active + 1 + rng.random_range(0..children.len() - 1)) % children.len();
                } else {
                    children[*active].mutate_once(rng);
                }
            }
            Gene::Object { fields } => {
                if fields.is_empty() {
                    return;
                }
                let i = rng.random_range(0..fields.len());
                fields[i].1.mutate_once(rng);
            }
            Gene::Optional { child, present } => {
                if rng.random_bool(0.4) {
                    *present = !*present;
                } else if *present {
                    child.mutate_once(rng);
                } else {
                    *present = true;
                }
            }
            Gene::Uuid { hi, lo } => {
                if rng.random_bool(0.5) {
                    *hi = mutate_long(*hi, rng);
                } else {
                    *lo = mutate_long(*lo, rng);
                }
            }
            Gene::Uri(u) => u.mutate(rng),
            Gene::Array {
                item,
                elements,
                min_items,
                max_items,
            } => {
                let can_grow = elements.len() < *max_items;
                let can_shrink = elements.len() > *min_items;
                match rng.random_range(0..3) {
                    0 if can_grow => elements.push(item.sample_unchecked(rng)),
                    1 if can_shrink && !elements.is_empty() => {
                        let i = rng.random_range(0..elements.len());
                        elements.remove(i);
                    }
                    _ => {
                        if elements.is_empty() {
                            if can_grow {
                                elements.push(item.sample_unchecked(rng));
                            }
                        } else {
                            let i = rng.random_range(0..elements.len());
                            elements[i].mutate_once(rng);
                        }
                    }
                }
            }
            Gene::Fixed { .. } => {}
        }
    }

    /// Visits every string gene with its path, in deterministic tree order.
    pub fn walk_strings(&self, f: &mut impl FnMut(GenePath, &StringGene)) {
        fn go(g: &Gene, path: &mut GenePath, f: &mut impl FnMut(GenePath, &StringGene)) {
            match g {
                Gene::Text(s) => f(path.clone(), s),
                Gene::Choice { children, active } => {
                    path.push(Seg::Index(*active));
                    go(&children[*active], path, f);
                    path.pop();
                }
                Gene::Object { fields } => {
                    for (name, child) in fields {
                        path.push(Seg::Field(name.clone()));
                        go(child, path, f);
                        path.pop();
                    }
                }
                Gene::Optional { child, present } => {
                    if *present {
                        path.push(Seg::Inner);
                        go(child, path, f);
                        path.pop();
                    }
                }
                Gene::Array { elements, .. } => {
                    for (i, e) in elements.iter().enumerate() {
                        path.push(Seg::Index(i));
                        go(e, path, f);
                        path.pop();
                    }
                }
                _ => {}
            }
        }
        go(self, &mut Vec::new(), f);
    }

    /// Resolves a path produced by [`Gene::walk_strings`] back to its string
    /// gene; `None` when the genotype changed shape since the walk.
    pub fn resolve_string_mut(&mut self, path: &[Seg]) -> Option<&mut StringGene> {
        match (self, path) {
            (Gene::Text(s), []) => Some(s),
            (Gene::Choice { children, active }, [Seg::Index(i), rest @ ..]) => {
                if i != active {
                    return None;
                }
                children.get_mut(*i)?.resolve_string_mut(rest)
            }
            (Gene::Object { fields }, [Seg::Field(name), rest @ ..]) => fields
                .iter_mut()
                .find(|(n, _)| n == name)
                .and_then(|(_, g)| g.resolve_string_mut(rest)),
            (Gene::Optional { child, present }, [Seg::Inner, rest @ ..]) => {
                if !*present {
                    return None;
                }
                child.resolve_string_mut(rest)
            }
            (Gene::Array { elements, .. }, [Seg::Index(i), rest @ ..]) => {
                elements.get_mut(*i)?.resolve_string_mut(rest)
            }
            _ => None,
        }
    }

    /// Structural invariants; exercised heavily by the validity fuzz tests.
    pub fn is_valid(&self) -> bool {
        match self {
            Gene::Integer { value, min, max } => min <= max && value >= min && value <= max,
            Gene::Long { .. } | Gene::Boolean { .. } | Gene::Uuid { .. } | Gene::Fixed { .. } => {
                true
            }
            Gene::Float { value, min, max } => {
                min <= max && value.is_finite() && value >= min && value <= max
            }
            Gene::Text(s) => s.is_valid(),
            Gene::Enum { values, active } => !values.is_empty() && active < &values.len(),
            Gene::Choice { children, active } => {
                !children.is_empty() && active < &children.len() && children.iter().all(|c| c.is_valid())
            }
            Gene::Object { fields } => fields.iter().all(|(_, g)| g.is_valid()),
            Gene::Optional { child, .. } => child.is_valid(),
            Gene::Uri(u) => u.is_valid(),
            Gene::Array {
                elements,
                min_items,
                max_items,
                ..
            } => {
                min_items <= max_items
                    && elements.len() >= *min_items
                    && elements.len() <= *max_items
                    && elements.iter().all(|e| e.is_valid())
            }
        }
    }
}

/// Canonical 8-4-4-4-12 rendering of a 128-bit id held as two signed longs.
pub fn uuid_text(hi: i64, lo: i64) -> String {
    let hi = hi as u64;
    let lo = lo as u64;
    format!(
        "{:08x}-{:04x}-{:04x}-{:04x}-{:012x}",
        hi >> 32,
        (hi >> 16) & 0xffff,
        hi & 0xffff,
        (lo >> 48) & 0xffff,
        lo & 0xffff_ffff_ffff
    )
}

/// Shortest round-trip decimal form. Non-finite values are clamped so a
/// phenotype is always printable.
pub fn format_float(v: f64) -> String {
    if v == f64::INFINITY {
        "1e308".to_string()
    } else if v == f64::NEG_INFINITY {
        "-1e308".to_string()
    } else if v.is_nan() {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

fn sample_long(rng: &mut Rng) -> i64 {
    // Geometric magnitude keeps most samples small while still reaching the
    // full range.
    let bits = rng.random_range(0..63u32);
    let magnitude = if bits == 0 {
        rng.random_range(0..=9)
    } else {
        rng.random_range(0..(1i64 << bits).max(10))
    };
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

fn sample_float_in(rng: &mut Rng, min: f64, max: f64) -> f64 {
    if min == max {
        return min;
    }
    let (lo, hi) = (min.max(-1e12), max.min(1e12));
    lo + (hi - lo) * rng.random::<f64>()
}

/// Geometric step: mostly local moves, occasional long jumps.
fn geometric_step(rng: &mut Rng) -> i64 {
    let exp = rng.random_range(0..20u32);
    let base = 1i64 << exp.min(40);
    rng.random_range(1..=base)
}

fn mutate_int_in(value: i64, min: i64, max: i64, rng: &mut Rng) -> i64 {
    if min == max {
        return value;
    }
    let step = geometric_step(rng);
    let next = if rng.random_bool(0.5) {
        value.saturating_add(step)
    } else {
        value.saturating_sub(step)
    };
    next.clamp(min, max)
}

fn mutate_long(value: i64, rng: &mut Rng) -> i64 {
    let step = geometric_step(rng);
    if rng.random_bool(0.5) {
        value.saturating_add(step)
    } else {
        value.saturating_sub(step)
    }
}

fn mutate_float(value: f64, min: f64, max: f64, rng: &mut Rng) -> f64 {
    if min == max {
        return value;
    }
    let exp = rng.random_range(-3..=3i32);
    let step = 10f64.powi(exp) * rng.random::<f64>();
    let next = if rng.random_bool(0.5) {
        value + step
    } else {
        value - step
    };
    if next.is_finite() {
        next.clamp(min.max(-1e12), max.min(1e12))
    } else {
        value
    }
}

fn mutate_text(s: &mut String, max_len: usize, charset: Charset, rng: &mut Rng) {
    let chars: Vec<char> = s.chars().collect();
    let op = rng.random_range(0..3);
    match op {
        0 if chars.len() < max_len => {
            // Insert at a random position.
            let pos = rng.random_range(0..=chars.len());
            let mut out: Vec<char> = chars;
            out.insert(pos, charset.sample(rng));
            *s = out.into_iter().collect();
        }
        1 if !chars.is_empty() => {
            let pos = rng.random_range(0..chars.len());
            let mut out: Vec<char> = chars;
            out.remove(pos);
            *s = out.into_iter().collect();
        }
        _ => {
            if chars.is_empty() {
                if max_len > 0 {
                    s.push(charset.sample(rng));
                }
            } else {
                let pos = rng.random_range(0..chars.len());
                let mut out: Vec<char> = chars;
                out[pos] = charset.sample(rng);
                *s = out.into_iter().collect();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng(seed: u64) -> Rng {
        Rng::seed_from_u64(seed)
    }

    #[test]
    fn integer_sampling_respects_bounds() {
        let t = GeneTemplate::Integer { min: 0, max: 65535 };
        let mut r = rng(42);
        for _ in 0..1000 {
            match t.sample(&mut r).unwrap() {
                Gene::Integer { value, .. } => assert!((0..=65535).contains(&value)),
                g => panic!("unexpected gene {g:?}"),
            }
        }
    }

    #[test]
    fn inconsistent_bounds_rejected() {
        let t = GeneTemplate::Integer { min: 10, max: 3 };
        assert!(t.sample(&mut rng(1)).is_err());
        let t = GeneTemplate::Array {
            item: Box::new(GeneTemplate::Boolean),
            min_items: 4,
            max_items: 1,
        };
        assert!(t.sample(&mut rng(1)).is_err());
    }

    #[test]
    fn enum_phenotype_is_a_member() {
        let t = GeneTemplate::Enum {
            values: vec!["TEST".into(), "EVENT".into()],
        };
        let mut r = rng(7);
        for _ in 0..100 {
            let g = t.sample(&mut r).unwrap();
            let p = g.render();
            assert!(p == "TEST" || p == "EVENT");
        }
    }

    #[test]
    fn uuid_rendering_layout() {
        assert_eq!(uuid_text(0, 0), "00000000-0000-0000-0000-000000000000");
        let g = Gene::Uuid { hi: 0, lo: 0 };
        assert_eq!(g.render(), "00000000-0000-0000-0000-000000000000");
        let re = regex::Regex::new(
            "^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$",
        )
        .unwrap();
        let mut r = rng(3);
        for _ in 0..200 {
            let mut g = GeneTemplate::Uuid.sample(&mut r).unwrap();
            assert!(re.is_match(&g.render()), "{}", g.render());
            g.mutate(&mut r);
            assert!(re.is_match(&g.render()), "{}", g.render());
        }
    }

    #[test]
    fn boolean_mutation_flips() {
        let mut g = Gene::Boolean { value: true };
        g.mutate(&mut rng(1));
        assert_eq!(g, Gene::Boolean { value: false });
    }

    #[test]
    fn choice_mutation_can_switch_active() {
        let t = GeneTemplate::Choice {
            children: vec![GeneTemplate::Boolean, GeneTemplate::Long, GeneTemplate::Uuid],
        };
        let mut r = rng(5);
        let g = t.sample(&mut r).unwrap();
        let Gene::Choice { active, .. } = &g else {
            panic!()
        };
        let start = *active;
        let mut seen_switch = false;
        let mut current = g;
        for _ in 0..100 {
            let mut next = current.clone();
            next.mutate(&mut r);
            if let Gene::Choice { active, .. } = &next {
                if *active != start {
                    seen_switch = true;
                    break;
                }
            }
            current = next;
        }
        assert!(seen_switch, "choice never switched its active child");
    }

    #[test]
    fn choice_phenotype_equals_active_child() {
        let mut r = rng(11);
        let t = GeneTemplate::Choice {
            children: vec![
                GeneTemplate::Integer { min: 0, max: 9 },
                GeneTemplate::text_default(),
            ],
        };
        for _ in 0..200 {
            let g = t.sample(&mut r).unwrap();
            if let Gene::Choice { children, active } = &g {
                assert_eq!(g.render(), children[*active].render());
            }
        }
    }

    #[test]
    fn mutation_changes_genotype_unless_singleton() {
        let templates = vec![
            GeneTemplate::Integer { min: -50, max: 50 },
            GeneTemplate::Long,
            GeneTemplate::Float {
                min: -10.0,
                max: 10.0,
            },
            GeneTemplate::Boolean,
            GeneTemplate::text_default(),
            GeneTemplate::Enum {
                values: vec!["A".into(), "B".into(), "C".into()],
            },
            GeneTemplate::Uuid,
            GeneTemplate::Uri,
        ];
        let mut r = rng(23);
        for t in templates {
            for _ in 0..200 {
                let g = t.sample(&mut r).unwrap();
                let mut m = g.clone();
                m.mutate(&mut r);
                assert_ne!(g, m, "mutation produced identical gene for {t:?}");
            }
        }
        // Singleton space: mutation is allowed to be the identity.
        let mut g = GeneTemplate::Integer { min: 4, max: 4 }.sample(&mut r).unwrap();
        let before = g.clone();
        g.mutate(&mut r);
        assert_eq!(g, before);
    }

    #[test]
    fn specialization_constant_renders_exactly() {
        let mut r = rng(9);
        let mut s = StringGene::new("free", 64, Charset::Printable);
        assert!(s.add_specialization(
            SpecializationKind::ConstantEquals("A quite long constant".into()),
            &mut r
        ));
        s.active = Some(0);
        assert_eq!(s.render(), "A quite long constant");
        s.active = None;
        assert_eq!(s.render(), "free");
    }

    #[test]
    fn duplicate_specializations_are_not_added() {
        let mut r = rng(10);
        let mut s = StringGene::new("x", 64, Charset::Printable);
        assert!(s.add_specialization(SpecializationKind::IntegerFormat, &mut r));
        assert!(!s.add_specialization(SpecializationKind::IntegerFormat, &mut r));
        assert_eq!(s.specializations.len(), 1);
    }

    #[test]
    fn walk_and_resolve_roundtrip() {
        let t = GeneTemplate::Object {
            fields: vec![
                FieldTemplate {
                    name: "a".into(),
                    template: GeneTemplate::text_default(),
                    required: true,
                },
                FieldTemplate {
                    name: "nested".into(),
                    template: GeneTemplate::Object {
                        fields: vec![FieldTemplate {
                            name: "b".into(),
                            template: GeneTemplate::text_default(),
                            required: true,
                        }],
                    },
                    required: true,
                },
            ],
        };
        let mut r = rng(14);
        let mut g = t.sample(&mut r).unwrap();
        let mut paths = Vec::new();
        g.walk_strings(&mut |p, _| paths.push(p));
        assert_eq!(paths.len(), 2);
        for p in paths {
            assert!(g.resolve_string_mut(&p).is_some());
        }
        assert!(g.resolve_string_mut(&[Seg::Field("zzz".into())]).is_none());
    }

    #[test]
    fn optional_absent_renders_omitted_in_objects() {
        let g = Gene::Object {
            fields: vec![
                ("keep".into(), Gene::Boolean { value: true }),
                (
                    "drop".into(),
                    Gene::Optional {
                        child: Box::new(Gene::Boolean { value: false }),
                        present: false,
                    },
                ),
            ],
        };
        let v = g.render_json();
        assert!(v.get("keep").is_some());
        assert!(v.get("drop").is_none());
    }
}
