//! SQL table schemas, entity constraint sets, and their reconciliation into
//! effective per-column constraints used when generating insert actions.
//!
//! Table schemas and entity constraints are supplied as declarative text
//! files (see `parse_tables` / `parse_entities` for the grammar, documented
//! in the README). An entity may imply constraints the database does not
//! enforce — a primitive field over a nullable column, or an enum over a
//! plain varchar — and inserts honoring the merged set avoid crashing the
//! entity layer when rows are read back.

use std::collections::BTreeMap;

use rand::Rng as _;

use crate::distance::ValidationConstraint;
use crate::error::{Error, Result};
use crate::genes::{Charset, Gene, StringGene};
use crate::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqlType {
    Integer,
    BigInt,
    Real,
    Boolean,
    Text,
    Varchar(u32),
}

impl SqlType {
    fn parse(token: &str) -> Result<SqlType> {
        if let Some(rest) = token.strip_prefix("varchar(") {
            let n = rest
                .strip_suffix(')')
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| Error::config(format!("bad varchar length in `{token}`")))?;
            return Ok(SqlType::Varchar(n));
        }
        match token {
            "integer" | "int" => Ok(SqlType::Integer),
            "bigint" => Ok(SqlType::BigInt),
            "real" | "double" => Ok(SqlType::Real),
            "boolean" | "bool" => Ok(SqlType::Boolean),
            "text" => Ok(SqlType::Text),
            other => Err(Error::config(format!("unknown SQL type `{other}`"))),
        }
    }

    pub fn is_numeric(self) -> bool {
        matches!(self, SqlType::Integer | SqlType::BigInt | SqlType::Real)
    }

    pub fn is_textual(self) -> bool {
        matches!(self, SqlType::Text | SqlType::Varchar(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSchema {
    pub name: String,
    pub sql_type: SqlType,
    pub nullable: bool,
    pub unique: bool,
    pub primary_key: bool,
    pub max_length: Option<u32>,
    pub check: Option<(i64, i64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableSchema {
    pub name: String,
    pub columns: Vec<ColumnSchema>,
}

impl TableSchema {
    pub fn column(&self, name: &str) -> Option<&ColumnSchema> {
        self.columns
            .iter()
            .find(|c| c.name.eq_ignore_ascii_case(name))
    }
}

/// Parses the line-oriented table schema format:
///
/// ```text
/// table app_session
/// column id bigint pk
/// column tan_counter integer nullable check 0..100
/// column teletan_type varchar(10) nullable
/// ```
pub fn parse_tables(text: &str) -> Result<Vec<TableSchema>> {
    let mut tables: Vec<TableSchema> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("table") => {
                let name = tokens
                    .next()
                    .ok_or_else(|| Error::config(format!("line {}: table needs a name", lineno + 1)))?;
                tables.push(TableSchema {
                    name: name.to_string(),
                    columns: Vec::new(),
                });
            }
            Some("column") => {
                let table = tables.last_mut().ok_or_else(|| {
                    Error::config(format!("line {}: column before any table", lineno + 1))
                })?;
                let name = tokens
                    .next()
                    .ok_or_else(|| Error::config(format!("line {}: column needs a name", lineno + 1)))?
                    .to_string();
                if table.columns.iter().any(|c| c.name.eq_ignore_ascii_case(&name)) {
                    return Err(Error::config(format!(
                        "line {}: duplicate column `{name}`",
                        lineno + 1
                    )));
                }
                let type_tok = tokens.next().ok_or_else(|| {
                    Error::config(format!("line {}: column `{name}` needs a type", lineno + 1))
                })?;
                let sql_type = SqlType::parse(type_tok)?;
                let mut col = ColumnSchema {
                    name,
                    sql_type,
                    nullable: false,
                    unique: false,
                    primary_key: false,
                    max_length: match sql_type {
                        SqlType::Varchar(n) => Some(n),
                        _ => None,
                    },
                    check: None,
                };
                let rest: Vec<&str> = tokens.collect();
                let mut i = 0;
                while i < rest.len() {
                    match rest[i] {
                        "nullable" => col.nullable = true,
                        "unique" => col.unique = true,
                        "pk" => {
                            col.primary_key = true;
                            col.unique = true;
                        }
                        "maxlen" => {
                            i += 1;
                            let n = rest.get(i).and_then(|x| x.parse().ok()).ok_or_else(|| {
                                Error::config(format!("line {}: maxlen needs a number", lineno + 1))
                            })?;
                            col.max_length = Some(n);
                        }
                        "check" => {
                            i += 1;
                            let spec = rest.get(i).ok_or_else(|| {
                                Error::config(format!("line {}: check needs min..max", lineno + 1))
                            })?;
                            let (lo, hi) = spec.split_once("..").ok_or_else(|| {
                                Error::config(format!("line {}: check needs min..max", lineno + 1))
                            })?;
                            let lo: i64 = lo.parse().map_err(|_| {
                                Error::config(format!("line {}: bad check bound `{lo}`", lineno + 1))
                            })?;
                            let hi: i64 = hi.parse().map_err(|_| {
                                Error::config(format!("line {}: bad check bound `{hi}`", lineno + 1))
                            })?;
                            col.check = Some((lo, hi));
                        }
                        other => {
                            return Err(Error::config(format!(
                                "line {}: unknown column attribute `{other}`",
                                lineno + 1
                            )))
                        }
                    }
                    i += 1;
                }
                table.columns.push(col);
            }
            Some(other) => {
                return Err(Error::config(format!(
                    "line {}: expected `table` or `column`, got `{other}`",
                    lineno + 1
                )))
            }
            None => {}
        }
    }
    Ok(tables)
}

/// Java-side field type; lowercase primitives imply NOT NULL.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldType {
    Int,
    Long,
    Double,
    Bool,
    Text,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityField {
    pub name: String,
    pub column: Option<String>,
    pub field_type: FieldType,
    /// Declared with a primitive type, so NULL crashes entity parsing.
    pub primitive: bool,
    pub enum_values: Option<Vec<String>>,
    pub validations: Vec<ValidationConstraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntityConstraintSet {
    pub entity_name: String,
    pub table: Option<String>,
    pub fields: Vec<EntityField>,
}

fn parse_field_type(token: &str) -> Result<(FieldType, bool)> {
    let (t, primitive) = match token {
        "int" => (FieldType::Int, true),
        "long" => (FieldType::Long, true),
        "double" => (FieldType::Double, true),
        "boolean" => (FieldType::Bool, true),
        "Integer" => (FieldType::Int, false),
        "Long" => (FieldType::Long, false),
        "Double" => (FieldType::Double, false),
        "Boolean" => (FieldType::Bool, false),
        "String" => (FieldType::Text, false),
        other => return Err(Error::config(format!("unknown field type `{other}`"))),
    };
    Ok((t, primitive))
}

fn parse_validation(token: &str) -> Result<ValidationConstraint> {
    let (name, arg) = match token.split_once('=') {
        Some((n, a)) => (n, Some(a)),
        None => (token, None),
    };
    let num = |a: Option<&str>| -> Result<f64> {
        a.and_then(|x| x.parse().ok())
            .ok_or_else(|| Error::config(format!("constraint `{token}` needs a numeric argument")))
    };
    Ok(match name {
        "Min" => ValidationConstraint::Min(num(arg)?),
        "Max" => ValidationConstraint::Max(num(arg)?),
        "Positive" => ValidationConstraint::Positive,
        "PositiveOrZero" => ValidationConstraint::PositiveOrZero,
        "Negative" => ValidationConstraint::Negative,
        "NegativeOrZero" => ValidationConstraint::NegativeOrZero,
        "Size" => {
            let spec = arg.ok_or_else(|| Error::config("Size needs min..max"))?;
            let (lo, hi) = spec
                .split_once("..")
                .ok_or_else(|| Error::config("Size needs min..max"))?;
            ValidationConstraint::Size {
                min: if lo.is_empty() {
                    None
                } else {
                    Some(lo.parse().map_err(|_| Error::config("bad Size bound"))?)
                },
                max: if hi.is_empty() {
                    None
                } else {
                    Some(hi.parse().map_err(|_| Error::config("bad Size bound"))?)
                },
            }
        }
        "NotEmpty" => ValidationConstraint::NotEmpty,
        "NotBlank" => ValidationConstraint::NotBlank,
        "Null" => ValidationConstraint::Null,
        "NotNull" => ValidationConstraint::NotNull,
        "AssertTrue" => ValidationConstraint::AssertTrue,
        "AssertFalse" => ValidationConstraint::AssertFalse,
        "Pattern" => ValidationConstraint::Pattern(
            arg.ok_or_else(|| Error::config("Pattern needs an argument"))?
                .to_string(),
        ),
        other => return Err(Error::config(format!("unknown constraint `{other}`"))),
    })
}

/// Parses the line-oriented entity constraint format:
///
/// ```text
/// entity VerificationAppSession table app_session
/// field tanCounter type int column tan_counter
/// field teleTanType type String column teletan_type enum TEST,EVENT
/// field hashedGuid type String validate Size=0..64
/// ```
pub fn parse_entities(text: &str) -> Result<Vec<EntityConstraintSet>> {
    let mut entities: Vec<EntityConstraintSet> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace().peekable();
        match tokens.next() {
            Some("entity") => {
                let name = tokens.next().ok_or_else(|| {
                    Error::config(format!("line {}: entity needs a name", lineno + 1))
                })?;
                let mut table = None;
                if tokens.peek() == Some(&"table") {
                    tokens.next();
                    table = Some(
                        tokens
                            .next()
                            .ok_or_else(|| {
                                Error::config(format!("line {}: table needs a name", lineno + 1))
                            })?
                            .to_string(),
                    );
                }
                entities.push(EntityConstraintSet {
                    entity_name: name.to_string(),
                    table,
                    fields: Vec::new(),
                });
            }
            Some("field") => {
                let entity = entities.last_mut().ok_or_else(|| {
                    Error::config(format!("line {}: field before any entity", lineno + 1))
                })?;
                let name = tokens
                    .next()
                    .ok_or_else(|| Error::config(format!("line {}: field needs a name", lineno + 1)))?
                    .to_string();
                let mut field = EntityField {
                    name,
                    column: None,
                    field_type: FieldType::Text,
                    primitive: false,
                    enum_values: None,
                    validations: Vec::new(),
                };
                let mut saw_type = false;
                while let Some(tok) = tokens.next() {
                    match tok {
                        "type" => {
                            let t = tokens.next().ok_or_else(|| {
                                Error::config(format!("line {}: type needs a value", lineno + 1))
                            })?;
                            let (ft, prim) = parse_field_type(t)?;
                            field.field_type = ft;
                            field.primitive = prim;
                            saw_type = true;
                        }
                        "column" => {
                            field.column = Some(
                                tokens
                                    .next()
                                    .ok_or_else(|| {
                                        Error::config(format!(
                                            "line {}: column needs a name",
                                            lineno + 1
                                        ))
                                    })?
                                    .to_string(),
                            );
                        }
                        "enum" => {
                            let list = tokens.next().ok_or_else(|| {
                                Error::config(format!("line {}: enum needs values", lineno + 1))
                            })?;
                            field.enum_values =
                                Some(list.split(',').map(|s| s.to_string()).collect());
                        }
                        "validate" => {
                            for v in tokens.by_ref() {
                                field.validations.push(parse_validation(v)?);
                            }
                        }
                        other => {
                            return Err(Error::config(format!(
                                "line {}: unknown field attribute `{other}`",
                                lineno + 1
                            )))
                        }
                    }
                }
                if !saw_type {
                    return Err(Error::config(format!(
                        "line {}: field `{}` needs a type",
                        lineno + 1,
                        field.name
                    )));
                }
                entity.fields.push(field);
            }
            Some(other) => {
                return Err(Error::config(format!(
                    "line {}: expected `entity` or `field`, got `{other}`",
                    lineno + 1
                )))
            }
            None => {}
        }
    }
    Ok(entities)
}

/// `VerificationAppSession` -> `verification_app_session`.
pub fn snake_case(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 4);
    for (i, c) in s.chars().enumerate() {
        if c.is_ascii_uppercase() {
            if i > 0 {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// Table binding for an entity: the resolved table plus one column per field.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedEntity {
    pub entity_name: String,
    pub table_name: String,
    /// field name -> column name, in entity field order.
    pub columns: Vec<(String, String)>,
}

/// Binds by explicit annotation first, else by snake_case of the entity or
/// field name.
pub fn resolve(entity: &EntityConstraintSet, tables: &[TableSchema]) -> Result<ResolvedEntity> {
    let wanted = entity
        .table
        .clone()
        .unwrap_or_else(|| snake_case(&entity.entity_name));
    let table = tables
        .iter()
        .find(|t| t.name.eq_ignore_ascii_case(&wanted))
        .ok_or_else(|| {
            let candidates: Vec<&str> = tables.iter().map(|t| t.name.as_str()).collect();
            Error::Reconcile(format!(
                "entity `{}` resolves to table `{wanted}` which does not exist (known tables: {})",
                entity.entity_name,
                candidates.join(", ")
            ))
        })?;
    let mut columns = Vec::new();
    for f in &entity.fields {
        let col_name = f.column.clone().unwrap_or_else(|| snake_case(&f.name));
        let col = table.column(&col_name).ok_or_else(|| {
            let candidates: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
            Error::Reconcile(format!(
                "field `{}` of entity `{}` resolves to column `{col_name}` not present in table `{}` (columns: {})",
                f.name,
                entity.entity_name,
                table.name,
                candidates.join(", ")
            ))
        })?;
        columns.push((f.name.clone(), col.name.clone()));
    }
    Ok(ResolvedEntity {
        entity_name: entity.entity_name.clone(),
        table_name: table.name.clone(),
        columns,
    })
}

/// Merged constraints for one column: the strictest of what the table and
/// the entity declare. The `entity_*` fields mark constraints the database
/// alone would not enforce; those are the ones a deliberate violation can
/// target.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EffectiveColumn {
    pub not_null: bool,
    /// Entity forbids NULL although the column is nullable; violating this
    /// crashes entity parsing when the field is primitive.
    pub entity_not_null_extra: bool,
    /// Set of admissible strings implied by an entity enum; stricter than
    /// the varchar column, so always a violatable extra.
    pub enum_values: Option<Vec<String>>,
    /// Intersection of the column CHECK range and entity Min/Max.
    pub range: Option<(i64, i64)>,
    /// True when the entity narrowed the numeric range beyond the CHECK.
    pub entity_range_extra: bool,
    pub max_length: Option<u32>,
    pub contradictory: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveConstraints {
    pub table_name: String,
    pub columns: BTreeMap<String, EffectiveColumn>,
    pub contradictory: bool,
}

impl EffectiveConstraints {
    /// Columns whose extra entity constraints can be deliberately violated.
    pub fn violatable_columns(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|(_, c)| {
                c.entity_not_null_extra || c.enum_values.is_some() || c.entity_range_extra
            })
            .map(|(name, _)| name.as_str())
            .collect()
    }

    /// Violatable columns whose violation crashes entity parsing (NULL into
    /// a primitive field, or a string outside the enum set).
    pub fn crashing_violatable_columns(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|(_, c)| c.entity_not_null_extra || c.enum_values.is_some())
            .map(|(name, _)| name.as_str())
            .collect()
    }
}

/// Builds the per-column merge of table and entity constraints.
pub fn reconcile(
    table: &TableSchema,
    entity: &EntityConstraintSet,
    binding: &ResolvedEntity,
) -> EffectiveConstraints {
    let mut columns: BTreeMap<String, EffectiveColumn> = BTreeMap::new();
    for col in &table.columns {
        columns.insert(
            col.name.clone(),
            EffectiveColumn {
                not_null: !col.nullable,
                range: col.check,
                max_length: col.max_length,
                ..EffectiveColumn::default()
            },
        );
    }
    let mut any_contradictory = false;
    for (field, col_name) in &binding.columns {
        let Some(f) = entity.fields.iter().find(|f| &f.name == field) else {
            continue;
        };
        let Some(col) = table.column(col_name) else {
            continue;
        };
        let eff = columns.get_mut(&col.name).expect("seeded from table");

        let implies_not_null = f.primitive
            || f.validations
                .iter()
                .any(|v| matches!(v, ValidationConstraint::NotNull));
        if implies_not_null {
            if !eff.not_null {
                eff.entity_not_null_extra = true;
            }
            eff.not_null = true;
        }

        if let Some(values) = &f.enum_values {
            let admissible: Vec<String> = match col.max_length {
                Some(n) => values
                    .iter()
                    .filter(|v| v.len() as u32 <= n)
                    .cloned()
                    .collect(),
                None => values.clone(),
            };
            if admissible.is_empty() {
                eff.contradictory = true;
                any_contradictory = true;
            } else {
                eff.enum_values = Some(admissible);
            }
        }

        let mut lo = eff.range.map(|r| r.0);
        let mut hi = eff.range.map(|r| r.1);
        let mut narrowed = false;
        for v in &f.validations {
            match v {
                ValidationConstraint::Min(m) => {
                    let m = *m as i64;
                    if lo.map(|x| m > x).unwrap_or(true) {
                        lo = Some(m);
                        narrowed = true;
                    }
                }
                ValidationConstraint::Max(m) => {
                    let m = *m as i64;
                    if hi.map(|x| m < x).unwrap_or(true) {
                        hi = Some(m);
                        narrowed = true;
                    }
                }
                _ => {}
            }
        }
        if narrowed {
            match (lo, hi) {
                (Some(a), Some(b)) if a > b => {
                    eff.contradictory = true;
                    any_contradictory = true;
                }
                (Some(a), Some(b)) => {
                    eff.range = Some((a, b));
                    eff.entity_range_extra = true;
                }
                (Some(a), None) => {
                    eff.range = Some((a, i64::MAX / 2));
                    eff.entity_range_extra = true;
                }
                (None, Some(b)) => {
                    eff.range = Some((i64::MIN / 2, b));
                    eff.entity_range_extra = true;
                }
                (None, None) => {}
            }
        }
    }
    EffectiveConstraints {
        table_name: table.name.clone(),
        columns,
        contradictory: any_contradictory,
    }
}

/// One row worth of evolvable genes, plus the bookkeeping needed to attribute
/// any entity-parse crash back to a deliberate violation.
#[derive(Debug, Clone, PartialEq)]
pub struct SqlInsertAction {
    pub table: String,
    pub columns: Vec<(String, Gene)>,
    /// Column whose extra constraint was deliberately violated.
    pub violated_column: Option<String>,
}

impl SqlInsertAction {
    /// Renders the row; absent optionals become SQL NULLs.
    pub fn render_row(&self) -> BTreeMap<String, serde_json::Value> {
        self.columns
            .iter()
            .map(|(name, gene)| (name.clone(), gene.render_json()))
            .collect()
    }
}

/// Monotone counters keeping generated primary keys collision-free.
#[derive(Debug, Default, Clone)]
pub struct PkCounters {
    next: BTreeMap<String, i64>,
}

impl PkCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn next_for(&mut self, table: &str) -> i64 {
        let n = self.next.entry(table.to_string()).or_insert(1);
        let v = *n;
        *n += 1;
        v
    }
}

const NULL_SKIP_PROBABILITY: f64 = 0.25;

/// Generates one insert whose genes satisfy the table's hard constraints,
/// and — when `effective` carries entity extras — satisfies those too except
/// for a deliberate violation drawn with probability `violate_probability`.
pub fn generate_insert(
    table: &TableSchema,
    effective: Option<&EffectiveConstraints>,
    rng: &mut Rng,
    violate_probability: f64,
    pks: &mut PkCounters,
) -> SqlInsertAction {
    let violatable: Vec<String> = effective
        .filter(|e| !e.contradictory)
        .map(|e| {
            e.violatable_columns()
                .iter()
                .map(|s| s.to_string())
                .collect()
        })
        .unwrap_or_default();
    let violated_column = if !violatable.is_empty()
        && violate_probability > 0.0
        && rng.random_bool(violate_probability)
    {
        Some(violatable[rng.random_range(0..violatable.len())].clone())
    } else {
        None
    };

    let mut columns = Vec::new();
    for col in &table.columns {
        let eff = effective.and_then(|e| e.columns.get(&col.name));
        let violate_here = violated_column.as_deref() == Some(col.name.as_str());
        let gene = if col.primary_key {
            Gene::fixed(pks.next_for(&table.name).to_string())
        } else if violate_here {
            violating_gene(col, eff, rng)
        } else {
            column_gene(col, eff, rng)
        };
        columns.push((col.name.clone(), gene));
    }
    SqlInsertAction {
        table: table.name.clone(),
        columns,
        violated_column,
    }
}

fn column_gene(col: &ColumnSchema, eff: Option<&EffectiveColumn>, rng: &mut Rng) -> Gene {
    let not_null = eff.map(|e| e.not_null).unwrap_or(!col.nullable);
    let inner = if let Some(values) = eff.and_then(|e| e.enum_values.as_ref()) {
        Gene::Enum {
            values: values.clone(),
            active: rng.random_range(0..values.len()),
        }
    } else {
        match col.sql_type {
            SqlType::Integer | SqlType::BigInt => {
                let (min, max) = eff
                    .and_then(|e| e.range)
                    .or(col.check)
                    .unwrap_or((-10_000, 10_000));
                Gene::Integer {
                    value: rng.random_range(min..=max),
                    min,
                    max,
                }
            }
            SqlType::Real => Gene::Float {
                value: rng.random_range(-1000..=1000) as f64,
                min: -1e6,
                max: 1e6,
            },
            SqlType::Boolean => Gene::Boolean {
                value: rng.random_bool(0.5),
            },
            SqlType::Text | SqlType::Varchar(_) => {
                let max_len = eff
                    .and_then(|e| e.max_length)
                    .or(col.max_length)
                    .unwrap_or(64) as usize;
                let len = rng.random_range(0..=max_len.min(12));
                let value: String = (0..len).map(|_| Charset::LowerAlnum.sample(rng)).collect();
                Gene::Text(StringGene::new(value, max_len, Charset::LowerAlnum))
            }
        }
    };
    if not_null {
        inner
    } else {
        // Nullable column without entity extras: keep some NULLs around.
        Gene::Optional {
            child: Box::new(inner),
            present: !rng.random_bool(NULL_SKIP_PROBABILITY),
        }
    }
}

/// Produces a gene violating exactly the entity-implied extra of `col`.
fn violating_gene(col: &ColumnSchema, eff: Option<&EffectiveColumn>, rng: &mut Rng) -> Gene {
    let Some(eff) = eff else {
        return column_gene(col, None, rng);
    };
    if eff.entity_not_null_extra {
        return Gene::Optional {
            child: Box::new(Gene::Integer {
                value: 0,
                min: 0,
                max: 0,
            }),
            present: false,
        };
    }
    if let Some(values) = &eff.enum_values {
        let max_len = col.max_length.unwrap_or(10) as usize;
        loop {
            let len = rng.random_range(1..=max_len.max(1)).min(10);
            let s: String = (0..len).map(|_| Charset::LowerAlnum.sample(rng)).collect();
            if !values.iter().any(|v| v == &s) {
                return Gene::Text(StringGene::new(s, max_len, Charset::LowerAlnum));
            }
        }
    }
    if eff.entity_range_extra {
        if let Some((lo, hi)) = eff.range {
            let check = col.check.unwrap_or((i64::MIN / 2, i64::MAX / 2));
            // Outside the entity range but inside the table CHECK.
            let candidate = if check.0 < lo {
                Some(lo - 1)
            } else if check.1 > hi {
                Some(hi + 1)
            } else {
                None
            };
            if let Some(v) = candidate {
                return Gene::Integer {
                    value: v,
                    min: v,
                    max: v,
                };
            }
        }
    }
    column_gene(col, Some(eff), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    const TABLES: &str = "
table app_session
column id bigint pk
column version bigint nullable
column tan_counter integer nullable
column teletan_type varchar(10) nullable
column sot varchar(30) nullable
column hashed_guid varchar(64) nullable
";

    const ENTITIES: &str = "
entity VerificationAppSession table app_session
field id type Long column id
field version type long
field tanCounter type int
field teleTanType type String column teletan_type enum TEST,EVENT
field sourceOfTrust type String column sot enum HASHED_GUID,TELETAN
field hashedGuid type String
";

    fn setup() -> (Vec<TableSchema>, Vec<EntityConstraintSet>) {
        (
            parse_tables(TABLES).unwrap(),
            parse_entities(ENTITIES).unwrap(),
        )
    }

    #[test]
    fn explicit_table_annotation_binds() {
        let (tables, entities) = setup();
        let r = resolve(&entities[0], &tables).unwrap();
        assert_eq!(r.table_name, "app_session");
    }

    #[test]
    fn snake_case_column_resolution() {
        let (tables, entities) = setup();
        let r = resolve(&entities[0], &tables).unwrap();
        let tan = r.columns.iter().find(|(f, _)| f == "tanCounter").unwrap();
        assert_eq!(tan.1, "tan_counter");
        assert_eq!(
            snake_case("VerificationAppSession"),
            "verification_app_session"
        );
    }

    #[test]
    fn unknown_table_is_an_error() {
        let (tables, _) = setup();
        let entity = EntityConstraintSet {
            entity_name: "Ghost".into(),
            table: None,
            fields: vec![],
        };
        let err = resolve(&entity, &tables).unwrap_err();
        assert!(err.to_string().contains("ghost"), "{err}");
    }

    #[test]
    fn unknown_column_lists_candidates() {
        let (tables, _) = setup();
        let entity = EntityConstraintSet {
            entity_name: "VerificationAppSession".into(),
            table: Some("app_session".into()),
            fields: vec![EntityField {
                name: "nonSuch".into(),
                column: None,
                field_type: FieldType::Int,
                primitive: true,
                enum_values: None,
                validations: vec![],
            }],
        };
        let err = resolve(&entity, &tables).unwrap_err();
        assert!(err.to_string().contains("non_such"), "{err}");
        assert!(err.to_string().contains("tan_counter"), "{err}");
    }

    #[test]
    fn reconcile_merges_strictest() {
        let (tables, entities) = setup();
        let binding = resolve(&entities[0], &tables).unwrap();
        let eff = reconcile(&tables[0], &entities[0], &binding);

        // Primitive int over nullable column: effective NOT NULL, extra.
        let tan = &eff.columns["tan_counter"];
        assert!(tan.not_null && tan.entity_not_null_extra);

        // varchar + enum: effective enum membership.
        let tele = &eff.columns["teletan_type"];
        assert_eq!(
            tele.enum_values.as_deref(),
            Some(&["TEST".to_string(), "EVENT".to_string()][..])
        );

        // Column without an entity field keeps table-only constraints.
        let id = &eff.columns["id"];
        assert!(!id.entity_not_null_extra && id.enum_values.is_none());

        assert_eq!(
            eff.violatable_columns(),
            vec!["sot", "tan_counter", "teletan_type", "version"]
        );
        assert_eq!(eff.violatable_columns(), eff.crashing_violatable_columns());
    }

    #[test]
    fn range_intersection_and_contradiction() {
        let tables =
            parse_tables("table t\ncolumn id bigint pk\ncolumn v integer nullable check 0..100")
                .unwrap();
        let entities = parse_entities("entity T\nfield v type Integer validate Min=10 Max=50").unwrap();
        let binding = resolve(&entities[0], &tables).unwrap();
        let eff = reconcile(&tables[0], &entities[0], &binding);
        assert_eq!(eff.columns["v"].range, Some((10, 50)));
        assert!(eff.columns["v"].entity_range_extra);

        let bad = parse_entities("entity T\nfield v type Integer validate Min=200").unwrap();
        let binding = resolve(&bad[0], &tables).unwrap();
        let eff = reconcile(&tables[0], &bad[0], &binding);
        assert!(eff.contradictory);
    }

    /// Effective domains only shrink: monotone with respect to both inputs.
    #[test]
    fn reconcile_is_monotone() {
        let (tables, entities) = setup();
        let binding = resolve(&entities[0], &tables).unwrap();
        let eff = reconcile(&tables[0], &entities[0], &binding);
        for col in &tables[0].columns {
            let e = &eff.columns[&col.name];
            // NOT NULL can only be added, never removed.
            if !col.nullable {
                assert!(e.not_null);
            }
            // Ranges only narrow relative to the CHECK.
            if let (Some(check), Some(range)) = (col.check, e.range) {
                assert!(range.0 >= check.0 && range.1 <= check.1);
            }
            // Enum values fit inside the varchar length.
            if let (Some(n), Some(values)) = (col.max_length, &e.enum_values) {
                assert!(values.iter().all(|v| v.len() as u32 <= n));
            }
        }
    }

    #[test]
    fn generated_inserts_respect_effective_constraints() {
        let (tables, entities) = setup();
        let binding = resolve(&entities[0], &tables).unwrap();
        let eff = reconcile(&tables[0], &entities[0], &binding);
        let mut rng = Rng::seed_from_u64(1);
        let mut pks = PkCounters::new();
        for _ in 0..500 {
            let ins = generate_insert(&tables[0], Some(&eff), &mut rng, 0.0, &mut pks);
            assert!(ins.violated_column.is_none());
            let row = ins.render_row();
            assert!(!row["tan_counter"].is_null());
            assert!(!row["version"].is_null());
            if !row["teletan_type"].is_null() {
                let s = row["teletan_type"].as_str().unwrap();
                assert!(s == "TEST" || s == "EVENT", "{s}");
            }
        }
    }

    #[test]
    fn violation_draw_marks_one_column() {
        let (tables, entities) = setup();
        let binding = resolve(&entities[0], &tables).unwrap();
        let eff = reconcile(&tables[0], &entities[0], &binding);
        let mut rng = Rng::seed_from_u64(5);
        let mut pks = PkCounters::new();
        let mut seen = 0;
        for _ in 0..2000 {
            let ins = generate_insert(&tables[0], Some(&eff), &mut rng, 0.5, &mut pks);
            if let Some(col) = &ins.violated_column {
                seen += 1;
                let row = ins.render_row();
                match col.as_str() {
                    "tan_counter" | "version" => assert!(row[col].is_null()),
                    "teletan_type" => {
                        let s = row[col].as_str().unwrap();
                        assert!(s != "TEST" && s != "EVENT");
                        assert!(s.len() <= 10);
                    }
                    "sot" => {
                        let s = row[col].as_str().unwrap();
                        assert!(s != "HASHED_GUID" && s != "TELETAN");
                    }
                    other => panic!("unexpected violated column {other}"),
                }
            }
        }
        assert!(seen > 800 && seen < 1200, "violation rate off: {seen}/2000");
    }

    #[test]
    fn pk_counter_is_monotone() {
        let mut pks = PkCounters::new();
        assert_eq!(pks.next_for("t"), 1);
        assert_eq!(pks.next_for("t"), 2);
        assert_eq!(pks.next_for("u"), 1);
    }

    #[test]
    fn table_only_generation_without_entity() {
        let tables =
            parse_tables("table plain\ncolumn id bigint pk\ncolumn note text nullable").unwrap();
        let mut rng = Rng::seed_from_u64(2);
        let mut pks = PkCounters::new();
        let ins = generate_insert(&tables[0], None, &mut rng, 0.5, &mut pks);
        assert!(ins.violated_column.is_none());
        assert_eq!(ins.columns.len(), 2);
    }

    #[test]
    fn contradictory_entity_falls_back_to_table_constraints() {
        // Enum values all longer than the varchar cap: contradiction.
        let tables = parse_tables("table t\ncolumn id bigint pk\ncolumn kind varchar(2) nullable").unwrap();
        let entities =
            parse_entities("entity T\nfield kind type String enum LONGNAME,OTHERNAME").unwrap();
        let binding = resolve(&entities[0], &tables).unwrap();
        let eff = reconcile(&tables[0], &entities[0], &binding);
        assert!(eff.contradictory);
        let mut rng = Rng::seed_from_u64(3);
        let mut pks = PkCounters::new();
        // Violation logic is skipped entirely for contradictory merges.
        let ins = generate_insert(&tables[0], Some(&eff), &mut rng, 1.0, &mut pks);
        assert!(ins.violated_column.is_none());
    }
}
