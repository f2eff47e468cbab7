//! Python module `smac`: analyzer, lexer, shard layout and a store handle.
//!
//! JSON-shaped data crosses the boundary as plain Python objects. Numbers
//! with a fractional part become `decimal.Decimal` so ether values stay exact.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyBytes, PyDict, PyFloat, PyInt, PyList, PyString, PyTuple};
use serde_json::{Map, Number, Value};
use smac_core::query::{introspect, respond, METRICS_TYPE};
use smac_core::store::{self, ArtifactKind};
use smac_core::{ContractAddress, ContractArtifacts, CorpusStore, ExtrinsicMetrics, SourceText};

create_exception!(smac, StoreError, pyo3::exceptions::PyException, "Corpus store failure.");
create_exception!(smac, NotFoundError, StoreError, "Address is not in the store.");

fn store_err(e: smac_core::StoreError) -> PyErr {
    match e {
        smac_core::StoreError::NotFound(_) => NotFoundError::new_err(e.to_string()),
        other => StoreError::new_err(other.to_string()),
    }
}

fn address(text: &str) -> PyResult<ContractAddress> {
    text.parse().map_err(|e: smac_core::AddressParseError| PyValueError::new_err(e.to_string()))
}

fn kind(text: &str) -> PyResult<ArtifactKind> {
    text.parse().map_err(|_| PyValueError::new_err(format!("unknown artifact kind {text:?}")))
}

fn source_text(obj: &Bound<'_, PyAny>) -> PyResult<SourceText> {
    if let Ok(s) = obj.extract::<String>() {
        return Ok(SourceText::from(s));
    }
    if obj.is_instance_of::<PyBytes>() {
        let bytes: Vec<u8> = obj.extract()?;
        return SourceText::from_bytes(bytes).map_err(|e| PyValueError::new_err(e.to_string()));
    }
    Err(PyTypeError::new_err("source must be str or bytes"))
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => PyBool::new(py, *b).to_owned().into_any(),
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                py.import("decimal")?.getattr("Decimal")?.call1((text,))?
            } else {
                py.get_type::<PyInt>().call1((text,))?
            }
        }
        Value::String(s) => PyString::new(py, s).into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    if obj.is_none() {
        return Ok(Value::Null);
    }
    if obj.is_instance_of::<PyBool>() {
        return Ok(Value::Bool(obj.extract()?));
    }
    if obj.is_instance_of::<PyString>() {
        return Ok(Value::String(obj.extract()?));
    }
    let decimal = obj.py().import("decimal")?.getattr("Decimal")?;
    let is_decimal = obj.is_instance(&decimal)?;
    if obj.is_instance_of::<PyInt>() || obj.is_instance_of::<PyFloat>() || is_decimal {
        let text: String =
            if is_decimal { obj.call_method1("__format__", ("f",))?.extract()? } else { obj.str()?.extract()? };
        return serde_json::from_str::<Number>(&text)
            .map(Value::Number)
            .map_err(|_| PyValueError::new_err(format!("{text} is not a finite number")));
    }
    if let Ok(dict) = obj.cast::<PyDict>() {
        let mut map = Map::new();
        for (k, v) in dict.iter() {
            let key: String = k.extract().map_err(|_| PyTypeError::new_err("dict keys must be str"))?;
            map.insert(key, from_py(&v)?);
        }
        return Ok(Value::Object(map));
    }
    if obj.is_instance_of::<PyList>() || obj.is_instance_of::<PyTuple>() {
        return obj.try_iter()?.map(|item| from_py(&item?)).collect::<PyResult<Vec<_>>>().map(Value::Array);
    }
    Err(PyTypeError::new_err(format!("cannot convert {} to JSON", obj.get_type().name()?)))
}

fn json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Metric vector of one source (`str`, or UTF-8 `bytes`).
#[pyfunction]
fn analyze<'py>(py: Python<'py>, source: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &json(&smac_core::analyze(&source_text(source)?)))
}

/// `(line, kind, lexeme)` for every token outside comments and strings.
#[pyfunction]
fn lex(source: &Bound<'_, PyAny>) -> PyResult<Vec<(u32, &'static str, String)>> {
    let src = source_text(source)?;
    Ok(smac_core::lex(&src).tokens.into_iter().map(|t| (t.line, t.kind.as_str(), t.lexeme)).collect())
}

/// Relative path of an artifact inside a store, `/`-separated.
#[pyfunction]
#[pyo3(signature = (address, kind = "source"))]
fn shard_path(address: &str, kind: &str) -> PyResult<String> {
    let a = self::address(address)?;
    Ok(store::shard_path(&a, self::kind(kind)?).to_string_lossy().replace('\\', "/"))
}

/// Field catalog of the metrics type.
#[pyfunction(name = "introspect")]
fn introspect_py(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &json(&introspect(METRICS_TYPE).expect("metrics type")))
}

/// Handle on an on-disk corpus store.
#[pyclass(name = "Corpus", module = "smac", frozen)]
struct Corpus {
    inner: CorpusStore,
}

#[pymethods]
impl Corpus {
    #[new]
    fn new(path: PathBuf) -> PyResult<Self> {
        CorpusStore::open(path).map(|inner| Self { inner }).map_err(store_err)
    }

    #[getter]
    fn root(&self) -> PathBuf {
        self.inner.root().to_path_buf()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, address: &str) -> PyResult<bool> {
        Ok(self.inner.contains(&self::address(address)?))
    }

    fn __repr__(&self) -> String {
        format!("Corpus({:?}, documents={})", self.inner.root().display(), self.inner.len())
    }

    /// Stores a contract and returns its document. A source already held
    /// under another address makes this a duplicate of that address.
    #[pyo3(signature = (address, source, abi = "", bytecode = "", extrinsic = None, retrieved_at = 0, provenance_url = None))]
    #[allow(clippy::too_many_arguments)]
    fn put<'py>(
        &self,
        py: Python<'py>,
        address: &str,
        source: &Bound<'py, PyAny>,
        abi: &str,
        bytecode: &str,
        extrinsic: Option<&Bound<'py, PyAny>>,
        retrieved_at: i64,
        provenance_url: Option<String>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let a = self::address(address)?;
        let artifacts = ContractArtifacts::new(source_text(source)?, abi, bytecode);
        let extrinsic: ExtrinsicMetrics = match extrinsic {
            None => ExtrinsicMetrics::default(),
            Some(obj) => {
                serde_json::from_value(from_py(obj)?).map_err(|e| PyValueError::new_err(format!("extrinsic: {e}")))?
            }
        };
        let doc = py
            .detach(|| self.inner.put_with_provenance(a, artifacts, extrinsic, retrieved_at, provenance_url))
            .map_err(store_err)?;
        to_py(py, &json(&doc))
    }

    /// Metadata document, or None.
    fn document<'py>(&self, py: Python<'py>, address: &str) -> PyResult<Bound<'py, PyAny>> {
        match self.inner.document(&self::address(address)?) {
            Some(doc) => to_py(py, &json(&doc)),
            None => Ok(py.None().into_bound(py)),
        }
    }

    /// `(document, {"source", "abi", "bytecode"})`; duplicates resolve to canonical bytes.
    fn get<'py>(&self, py: Python<'py>, address: &str) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyDict>)> {
        let (doc, art) = self.inner.get(&self::address(address)?).map_err(store_err)?;
        let files = PyDict::new(py);
        files.set_item("source", art.source.as_str())?;
        files.set_item("abi", art.abi)?;
        files.set_item("bytecode", art.bytecode)?;
        Ok((to_py(py, &json(&doc))?, files))
    }

    /// Raw artifact bytes.
    #[pyo3(signature = (address, kind = "source"))]
    fn artifact<'py>(&self, py: Python<'py>, address: &str, kind: &str) -> PyResult<Bound<'py, PyBytes>> {
        let bytes = self.inner.artifact_bytes(&self::address(address)?, self::kind(kind)?).map_err(store_err)?;
        Ok(PyBytes::new(py, &bytes))
    }

    /// Runs a query and returns the response envelope; errors come back in
    /// its `errors` list rather than as exceptions.
    #[pyo3(signature = (text, variables = None, max_rows = 1000))]
    fn query<'py>(
        &self,
        py: Python<'py>,
        text: &str,
        variables: Option<&Bound<'py, PyAny>>,
        max_rows: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        let body = self.query_json(py, text, variables, max_rows)?;
        to_py(py, &serde_json::from_str(&body).expect("envelope is JSON"))
    }

    /// The envelope as the exact JSON text the HTTP service would send.
    #[pyo3(signature = (text, variables = None, max_rows = 1000))]
    fn query_json(
        &self,
        py: Python<'_>,
        text: &str,
        variables: Option<&Bound<'_, PyAny>>,
        max_rows: usize,
    ) -> PyResult<String> {
        let vars = match variables.map(from_py).transpose()? {
            None | Some(Value::Null) => Map::new(),
            Some(Value::Object(m)) => m,
            Some(_) => return Err(PyTypeError::new_err("variables must be a dict")),
        };
        if max_rows == 0 {
            return Err(PyValueError::new_err("max_rows must be at least 1"));
        }
        Ok(py.detach(|| respond(text, &vars, &self.inner, max_rows).to_json()))
    }

    /// `[{"date": "YYYY-MM-DD", "count": n}]`, ascending.
    fn daily_counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &json(&self.inner.daily_counts()))
    }

    /// Re-reads metadata if another process wrote to the store; returns whether it did.
    fn refresh(&self) -> PyResult<bool> {
        self.inner.refresh().map_err(store_err)
    }

    fn introspect<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        introspect_py(py)
    }
}

#[pymodule]
fn smac(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(lex, m)?)?;
    m.add_function(wrap_pyfunction!(shard_path, m)?)?;
    m.add_function(wrap_pyfunction!(introspect_py, m)?)?;
    m.add_class::<Corpus>()?;
    m.add("StoreError", m.py().get_type::<StoreError>())?;
    m.add("NotFoundError", m.py().get_type::<NotFoundError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
