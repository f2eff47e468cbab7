//! Filter queries over the corpus: a single `metrics` root field, suffix
//! operators (`functions_gt`, `address_eq`, ...) combined with AND, a flat
//! selection set, variables, and a field-catalog introspection.

mod fields;
mod parser;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::store::{ContractDocument, CorpusStore};
pub use fields::{
    catalog, wei_to_ether, Field, FieldCatalog, FieldInfo, FieldKind, FilterValue, Numeric, Op, METRICS_TYPE,
};
pub use parser::parse_request;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("SyntaxError: {message} (line {line}, column {column})")]
    Syntax { message: String, line: usize, column: usize },
    #[error("UnknownField: {0}")]
    UnknownField(String),
    #[error("UnknownOperator: {0}")]
    UnknownOperator(String),
    #[error("UnboundVariable: ${0} has no value")]
    UnboundVariable(String),
    #[error("TypeMismatch: {0}")]
    TypeMismatch(String),
    #[error("UnknownType: {0}")]
    UnknownType(String),
}

impl QueryError {
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::Syntax { .. } => "SyntaxError",
            QueryError::UnknownField(_) => "UnknownField",
            QueryError::UnknownOperator(_) => "UnknownOperator",
            QueryError::UnboundVariable(_) => "UnboundVariable",
            QueryError::TypeMismatch(_) => "TypeMismatch",
            QueryError::UnknownType(_) => "UnknownType",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterPredicate {
    pub field: Field,
    pub op: Op,
    pub value: FilterValue,
}

impl FilterPredicate {
    /// A document lacking the field matches no operator, `ne` included.
    pub fn matches(&self, doc: &ContractDocument) -> bool {
        self.field.filter_value(doc).and_then(|v| v.compare(&self.value)).is_some_and(|ord| self.op.holds(ord))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    /// All must hold.
    pub predicates: Vec<FilterPredicate>,
    pub selection: Vec<Field>,
}

impl Query {
    pub fn matches(&self, doc: &ContractDocument) -> bool {
        self.predicates.iter().all(|p| p.matches(doc))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Request {
    Metrics(Query),
    Introspect { type_name: String },
}

pub type Row = Map<String, Value>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultSet {
    /// Address ascending; each row holds exactly the selected fields.
    pub rows: Vec<Row>,
}

pub fn parse_query(text: &str, variables: &Map<String, Value>) -> Result<Query, QueryError> {
    match parse_request(text, variables)? {
        Request::Metrics(q) => Ok(q),
        Request::Introspect { .. } => Err(QueryError::UnknownField("__type".into())),
    }
}

pub fn project(doc: &ContractDocument, selection: &[Field]) -> Row {
    selection.iter().map(|f| (f.response_name().to_string(), f.output_value(doc))).collect()
}

pub fn execute(query: &Query, store: &CorpusStore) -> ResultSet {
    let rows = store.scan(|doc| query.matches(doc)).iter().map(|doc| project(doc, &query.selection)).collect();
    ResultSet { rows }
}

pub fn introspect(type_name: &str) -> Result<FieldCatalog, QueryError> {
    if type_name == METRICS_TYPE || type_name == "metrics" {
        Ok(catalog())
    } else {
        Err(QueryError::UnknownType(type_name.to_string()))
    }
}

/// The response envelope shared by the HTTP service and the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub body: Value,
    pub error: Option<QueryError>,
}

impl Response {
    pub fn is_error(&self) -> bool {
        self.error.is_some()
    }

    /// Compact JSON text of the envelope.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.body).expect("response serializes")
    }

    pub fn from_error(err: QueryError) -> Self {
        Self {
            body: json!({
                "errors": [{ "message": err.to_string(), "extensions": { "code": err.code() } }]
            }),
            error: Some(err),
        }
    }
}

/// Parses and runs a request document. Result rows beyond `max_rows` are
/// dropped and `"truncated": true` is set next to `data`.
pub fn respond(text: &str, variables: &Map<String, Value>, store: &CorpusStore, max_rows: usize) -> Response {
    let request = match parse_request(text, variables) {
        Ok(r) => r,
        Err(e) => return Response::from_error(e),
    };
    match request {
        Request::Metrics(q) => {
            let mut rows = execute(&q, store).rows;
            let truncated = rows.len() > max_rows;
            rows.truncate(max_rows);
            let mut body = json!({ "data": { "metrics": rows } });
            if truncated {
                body["truncated"] = Value::Bool(true);
            }
            Response { body, error: None }
        }
        Request::Introspect { type_name } => match introspect(&type_name) {
            Ok(cat) => Response { body: json!({ "data": { "__type": cat } }), error: None },
            Err(e) => Response::from_error(e),
        },
    }
}
