//! Tainted-value minting and recognition, plus the fake-input discovery
//! protocol constants.
//!
//! Tainted strings have the exact form `_EM_{id}_XYZ_`. When one surfaces in
//! a tracked operation, the sighting identifies which string gene produced it
//! so the gene can be specialized (exact constant, regex, enum member, or a
//! typed format gene) instead of evolved character by character.

/// Extra header sent during the discovery window.
pub const FAKE_HEADER: &str = "x-EMextraHeader123";
/// Extra query parameter sent during the discovery window.
pub const FAKE_PARAM: &str = "EMextraParam123";
/// Parameter name that frameworks treat as a verb override; never a real
/// discovery.
pub const METHOD_OVERRIDE_PARAM: &str = "_method";

/// Fraction of the budget during which fake inputs are injected.
pub const DISCOVERY_WINDOW_FRACTION: f64 = 0.10;
/// Collections larger than this are skipped by the fake-name matching.
pub const DISCOVERY_COLLECTION_CAP: usize = 16;

const PREFIX: &str = "_EM_";
const SUFFIX: &str = "_XYZ_";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaintedValue {
    pub id: u64,
}

impl TaintedValue {
    pub fn text(&self) -> String {
        format!("{PREFIX}{}{SUFFIX}", self.id)
    }
}

/// Mints fresh tainted values with ids unique for the registry's lifetime.
#[derive(Debug, Default)]
pub struct TaintRegistry {
    next_id: u64,
}

impl TaintRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mint(&mut self) -> TaintedValue {
        let id = self.next_id;
        self.next_id += 1;
        TaintedValue { id }
    }
}

/// Full-string recognition of the taint grammar. Partial matches are
/// rejected: false positives would attach specializations to the wrong gene.
pub fn recognize(s: &str) -> Option<u64> {
    let rest = s.strip_prefix(PREFIX)?;
    let digits = rest.strip_suffix(SUFFIX)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Refinement learned for one string gene.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecializationKind {
    ConstantEquals(String),
    ConstantPrefix(String),
    RegexMatch(String),
    EnumMember(Vec<String>),
    IntegerFormat,
    FloatFormat,
    UuidFormat,
    UriFormat,
    UrlFormat,
}

/// Runtime sighting of a tainted value flowing into a tracked operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Sighting {
    pub taint_id: u64,
    pub kind: SpecializationKind,
    /// Target at whose probe site the taint surfaced.
    pub context: String,
}

/// True while fake-input injection and discovery matching are allowed.
pub fn discovery_window_active(consumed: u64, total: u64, fraction: f64) -> bool {
    if total == 0 {
        return false;
    }
    (consumed as f64) / (total as f64) < fraction
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mint_format_and_roundtrip() {
        let mut reg = TaintRegistry::new();
        let t0 = reg.mint();
        assert_eq!(t0.text(), "_EM_0_XYZ_");
        let t1 = reg.mint();
        assert_ne!(t0.id, t1.id);
        assert_eq!(recognize(&t1.text()), Some(t1.id));
    }

    #[test]
    fn recognize_is_full_match_only() {
        assert_eq!(recognize("_EM_42_XYZ_"), Some(42));
        assert_eq!(recognize("hello"), None);
        assert_eq!(recognize("x_EM_1_XYZ_"), None);
        assert_eq!(recognize("_EM_1_XYZ_x"), None);
        assert_eq!(recognize("_EM__XYZ_"), None);
        assert_eq!(recognize("_EM_1a_XYZ_"), None);
    }

    #[test]
    fn recognize_large_id_range() {
        for id in (0..1_000_000u64).step_by(997) {
            let t = TaintedValue { id };
            assert_eq!(recognize(&t.text()), Some(id));
        }
        assert_eq!(recognize(&TaintedValue { id: 1_000_000 }.text()), Some(1_000_000));
    }

    #[test]
    fn window_boundaries() {
        assert!(discovery_window_active(0, 100, 0.10));
        assert!(discovery_window_active(9, 100, 0.10));
        assert!(!discovery_window_active(10, 100, 0.10));
        assert!(!discovery_window_active(50, 100, 0.10));
        assert!(!discovery_window_active(0, 0, 0.10));
    }
}
