use std::cmp::Ordering;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::Serialize;
use serde_json::{Number, Value};

use crate::address::ContractAddress;
use crate::store::ContractDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Number,
    String,
    Address,
    Timestamp,
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Eq,
    Ne,
    Gt,
    Gte,
    Lt,
    Lte,
}

impl Op {
    pub const ALL: [Op; 6] = [Op::Eq, Op::Ne, Op::Gt, Op::Gte, Op::Lt, Op::Lte];

    pub fn suffix(self) -> &'static str {
        match self {
            Op::Eq => "eq",
            Op::Ne => "ne",
            Op::Gt => "gt",
            Op::Gte => "gte",
            Op::Lt => "lt",
            Op::Lte => "lte",
        }
    }

    pub fn from_suffix(s: &str) -> Option<Op> {
        Op::ALL.into_iter().find(|op| op.suffix() == s)
    }

    pub fn is_ordering(self) -> bool {
        !matches!(self, Op::Eq | Op::Ne)
    }

    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            Op::Eq => ord == Ordering::Equal,
            Op::Ne => ord != Ordering::Equal,
            Op::Gt => ord == Ordering::Greater,
            Op::Gte => ord != Ordering::Less,
            Op::Lt => ord == Ordering::Less,
            Op::Lte => ord != Ordering::Greater,
        }
    }
}

/// Exact numeric value: integers stay integers, everything else is decimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Numeric {
    Int(i128),
    /// Integers above `i128::MAX` (large wei balances).
    Big(u128),
    Dec(Decimal),
}

impl Numeric {
    pub fn parse(text: &str) -> Option<Numeric> {
        if text.bytes().all(|b| b.is_ascii_digit() || b == b'-') {
            return text.parse().map(Numeric::Int).or_else(|_| text.parse().map(Numeric::Big)).ok();
        }
        Decimal::from_str(text).or_else(|_| Decimal::from_scientific(text)).ok().map(|d| Numeric::Dec(d.normalize()))
    }

    pub fn compare(&self, other: &Numeric) -> Ordering {
        match (self, other) {
            (Numeric::Int(a), Numeric::Int(b)) => a.cmp(b),
            (Numeric::Dec(a), Numeric::Dec(b)) => a.cmp(b),
            (Numeric::Int(a), Numeric::Dec(b)) => cmp_int_dec(*a, b),
            (Numeric::Dec(a), Numeric::Int(b)) => cmp_int_dec(*b, a).reverse(),
            (Numeric::Big(a), Numeric::Big(b)) => a.cmp(b),
            // A Big exceeds every i128 and every Decimal.
            (Numeric::Big(_), _) => Ordering::Greater,
            (_, Numeric::Big(_)) => Ordering::Less,
        }
    }

    pub fn from_u128(v: u128) -> Numeric {
        i128::try_from(v).map_or(Numeric::Big(v), Numeric::Int)
    }
}

fn cmp_int_dec(i: i128, d: &Decimal) -> Ordering {
    match Decimal::try_from_i128_with_scale(i, 0) {
        Ok(as_dec) => as_dec.cmp(d),
        // Outside decimal range, so beyond any decimal value.
        Err(_) => {
            if i > 0 {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
    }
}

/// A document field value as seen by filters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterValue {
    Num(Numeric),
    Str(String),
    Addr(ContractAddress),
}

impl FilterValue {
    /// `None` when the two values are of different kinds.
    pub fn compare(&self, other: &FilterValue) -> Option<Ordering> {
        match (self, other) {
            (FilterValue::Num(a), FilterValue::Num(b)) => Some(a.compare(b)),
            (FilterValue::Str(a), FilterValue::Str(b)) => Some(a.cmp(b)),
            (FilterValue::Addr(a), FilterValue::Addr(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

/// Every field of the metrics record type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Address,
    Pragma,
    Sloc,
    Functions,
    Events,
    Modifiers,
    Payable,
    Mapping,
    AddressVars,
    Transactions,
    Balance,
    BalanceEther,
    EtherValue,
    Token,
    FirstSeen,
    LastSeen,
    RetrievedAt,
    SourceHash,
    DuplicateOf,
    ProvenanceUrl,
}

impl Field {
    pub const ALL: [Field; 20] = [
        Field::Address,
        Field::Pragma,
        Field::Sloc,
        Field::Functions,
        Field::Events,
        Field::Modifiers,
        Field::Payable,
        Field::Mapping,
        Field::AddressVars,
        Field::Transactions,
        Field::Balance,
        Field::BalanceEther,
        Field::EtherValue,
        Field::Token,
        Field::FirstSeen,
        Field::LastSeen,
        Field::RetrievedAt,
        Field::SourceHash,
        Field::DuplicateOf,
        Field::ProvenanceUrl,
    ];

    /// Name used in filters and selections.
    pub fn name(self) -> &'static str {
        match self {
            Field::Address => "address",
            Field::Pragma => "pragma",
            Field::Sloc => "sloc",
            Field::Functions => "functions",
            Field::Events => "events",
            Field::Modifiers => "modifiers",
            Field::Payable => "payable",
            Field::Mapping => "mapping",
            Field::AddressVars => "addressVars",
            Field::Transactions => "transactions",
            Field::Balance => "balance",
            Field::BalanceEther => "balanceEther",
            Field::EtherValue => "etherValue",
            Field::Token => "token",
            Field::FirstSeen => "firstSeen",
            Field::LastSeen => "lastSeen",
            Field::RetrievedAt => "retrievedAt",
            Field::SourceHash => "sourceHash",
            Field::DuplicateOf => "duplicateOf",
            Field::ProvenanceUrl => "provenanceUrl",
        }
    }

    /// Key used in result rows.
    pub fn response_name(self) -> &'static str {
        match self {
            Field::Address => "contractAddress",
            other => other.name(),
        }
    }

    /// Resolves a field name. The address is accepted under its response
    /// name and under the `adress` spelling too.
    pub fn lookup(name: &str) -> Option<Field> {
        match name {
            "adress" | "contractAddress" => Some(Field::Address),
            _ => Field::ALL.into_iter().find(|f| f.name() == name),
        }
    }

    pub fn kind(self) -> FieldKind {
        match self {
            Field::Address | Field::DuplicateOf => FieldKind::Address,
            Field::Pragma | Field::SourceHash | Field::ProvenanceUrl | Field::BalanceEther => FieldKind::String,
            Field::FirstSeen | Field::LastSeen | Field::RetrievedAt => FieldKind::Timestamp,
            Field::Token => FieldKind::List,
            _ => FieldKind::Number,
        }
    }

    /// Derived and list-valued fields can be selected but not filtered.
    pub fn filterable(self) -> bool {
        !matches!(self, Field::Token | Field::BalanceEther)
    }

    pub fn operators(self) -> &'static [Op] {
        if !self.filterable() {
            return &[];
        }
        match self.kind() {
            FieldKind::Number | FieldKind::Timestamp => &Op::ALL,
            _ => &[Op::Eq, Op::Ne],
        }
    }

    pub fn optional(self) -> bool {
        matches!(self, Field::FirstSeen | Field::LastSeen | Field::DuplicateOf | Field::ProvenanceUrl)
    }

    /// Value compared by filters; `None` if the document lacks the field.
    pub fn filter_value(self, doc: &ContractDocument) -> Option<FilterValue> {
        let n = |v: u64| Some(FilterValue::Num(Numeric::Int(v as i128)));
        let i = &doc.intrinsic;
        let e = &doc.extrinsic;
        match self {
            Field::Address => Some(FilterValue::Addr(doc.address)),
            Field::Pragma => Some(FilterValue::Str(i.pragma.clone())),
            Field::Sloc => n(i.sloc),
            Field::Functions => n(i.functions),
            Field::Events => n(i.events),
            Field::Modifiers => n(i.modifiers),
            Field::Payable => n(i.payable),
            Field::Mapping => n(i.mapping),
            Field::AddressVars => n(i.address_vars),
            Field::Transactions => n(e.transactions),
            Field::Balance => Some(FilterValue::Num(Numeric::from_u128(e.balance))),
            Field::EtherValue => Some(FilterValue::Num(Numeric::Dec(e.ether_value))),
            Field::FirstSeen => e.first_seen.map(|t| FilterValue::Num(Numeric::Int(t as i128))),
            Field::LastSeen => e.last_seen.map(|t| FilterValue::Num(Numeric::Int(t as i128))),
            Field::RetrievedAt => Some(FilterValue::Num(Numeric::Int(doc.retrieved_at as i128))),
            Field::SourceHash => Some(FilterValue::Str(doc.source_hash.clone())),
            Field::DuplicateOf => doc.duplicate_of.map(FilterValue::Addr),
            Field::ProvenanceUrl => doc.provenance_url.clone().map(FilterValue::Str),
            Field::Token | Field::BalanceEther => None,
        }
    }

    /// Value emitted in result rows.
    pub fn output_value(self, doc: &ContractDocument) -> Value {
        let i = &doc.intrinsic;
        let e = &doc.extrinsic;
        let opt_ts = |t: Option<i64>| t.map_or(Value::Null, Value::from);
        match self {
            Field::Address => Value::String(doc.address.to_string()),
            Field::Pragma => Value::String(i.pragma.clone()),
            Field::Sloc => i.sloc.into(),
            Field::Functions => i.functions.into(),
            Field::Events => i.events.into(),
            Field::Modifiers => i.modifiers.into(),
            Field::Payable => i.payable.into(),
            Field::Mapping => i.mapping.into(),
            Field::AddressVars => i.address_vars.into(),
            Field::Transactions => e.transactions.into(),
            Field::Balance => exact_number(&e.balance.to_string()),
            Field::BalanceEther => Value::String(wei_to_ether(e.balance)),
            Field::EtherValue => exact_number(&e.ether_value.to_string()),
            Field::Token => serde_json::to_value(&e.token).expect("token list serializes"),
            Field::FirstSeen => opt_ts(e.first_seen),
            Field::LastSeen => opt_ts(e.last_seen),
            Field::RetrievedAt => doc.retrieved_at.into(),
            Field::SourceHash => Value::String(doc.source_hash.clone()),
            Field::DuplicateOf => doc.duplicate_of.map_or(Value::Null, |a| Value::String(a.to_string())),
            Field::ProvenanceUrl => doc.provenance_url.clone().map_or(Value::Null, Value::String),
        }
    }
}

fn exact_number(text: &str) -> Value {
    Number::from_str(text).map(Value::Number).unwrap_or_else(|_| Value::String(text.to_string()))
}

/// Wei rendered as a decimal ether amount with no trailing zeros.
pub fn wei_to_ether(wei: u128) -> String {
    const WEI_PER_ETHER: u128 = 1_000_000_000_000_000_000;
    let whole = wei / WEI_PER_ETHER;
    let frac = wei % WEI_PER_ETHER;
    if frac == 0 {
        return whole.to_string();
    }
    let digits = format!("{frac:018}");
    format!("{whole}.{}", digits.trim_end_matches('0'))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FieldInfo {
    pub name: &'static str,
    pub response_name: &'static str,
    pub kind: FieldKind,
    pub operators: Vec<&'static str>,
    pub optional: bool,
}

/// Field listing returned by type introspection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldCatalog {
    pub name: &'static str,
    pub fields: Vec<FieldInfo>,
}

pub const METRICS_TYPE: &str = "Metrics";

pub fn catalog() -> FieldCatalog {
    FieldCatalog {
        name: METRICS_TYPE,
        fields: Field::ALL
            .into_iter()
            .map(|f| FieldInfo {
                name: f.name(),
                response_name: f.response_name(),
                kind: f.kind(),
                operators: f.operators().iter().map(|op| op.suffix()).collect(),
                optional: f.optional(),
            })
            .collect(),
    }
}
