//! One pass/fail line per headline criterion. Runs without the web client.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{Cursor, Read};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::{to_bytes, Body};
use axum::http::{header, Request, StatusCode};
use axum::Router;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde_json::{json, Map, Value};
use smac_api::{router, ServiceConfig};
use smac_core::ingest::{
    scan_blocks, ChainTransaction, ClientError, Clock, ContractPage, ExplorerClient, ExtractionRule, FixtureExplorer,
    FixtureWriter, IngestReport, ManualClock, RateLimit, Throttle,
};
use smac_core::query::{execute, parse_query, respond};
use smac_core::{analyze, ContractAddress, ContractArtifacts, CorpusStore, ExtrinsicMetrics, SourceText};
use tower::ServiceExt;

type Outcome = Result<(), String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn addr(s: &str) -> ContractAddress {
    s.parse().unwrap()
}

fn main() -> ExitCode {
    let criteria: &[Criterion] = &[
        ("golden queries", Duration::from_secs(1), goldens),
        ("analyzer oracle suite", Duration::from_secs(5), analyzer_suite),
        ("dedup property", Duration::from_secs(10), dedup),
        ("query oracle equivalence", Duration::from_secs(30), query_oracle),
        ("fixture ingest end-to-end", Duration::from_secs(10), fixture_ingest),
        ("rate-limit safety", Duration::from_secs(5), rate_limit),
        ("round-trip fidelity", Duration::from_secs(30), round_trip),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let started = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let elapsed = started.elapsed();
        let outcome =
            outcome.and_then(|()| if elapsed <= *budget { Ok(()) } else { Err(format!("over budget of {budget:?}")) });
        match outcome {
            Ok(()) => println!("PASS {name} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({elapsed:.2?}): {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// Golden queries -------------------------------------------------------------

fn goldens() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::open(dir.path()).unwrap();
    for a in [
        "0xb7f4c286851cbf0cbf2fe8ebf40412b196c0e8ad",
        "0x755cebe8cc53c7cb1e1bb641026a17d37d4aea91",
        "0xb92aa4a864daf0d6a509e73a9364feba44384965",
        "0x536c7efeebff067a69393133b1c87a163a6b0598",
    ] {
        let src = fs::read(fixtures().join("sources").join(format!("{a}.sol"))).unwrap();
        let ext = if a.starts_with("0x536c") {
            ExtrinsicMetrics { transactions: 639, balance: 0, ..Default::default() }
        } else {
            ExtrinsicMetrics::default()
        };
        let src = SourceText::from_bytes(src).unwrap();
        store.put(addr(a), ContractArtifacts::new(src, "", ""), ext, 1_600_000_000).unwrap();
    }
    let functions_query = "{ metrics(query:{functions_gt: 20}) { adress events functions modifiers payable } }";
    let address_query = r#"{ metrics(query:{address_eq: "0x536c7efeebff067a69393133b1c87a163a6b0598"}) { adress transactions balance } }"#;
    let got = respond(functions_query, &Map::new(), &store, 1000).body;
    let want = json!({"data": {"metrics": [
        {"contractAddress": "0x755cebe8cc53c7cb1e1bb641026a17d37d4aea91", "events": 4, "functions": 31, "modifiers": 1, "payable": 4},
        {"contractAddress": "0xb7f4c286851cbf0cbf2fe8ebf40412b196c0e8ad", "events": 7, "functions": 27, "modifiers": 1, "payable": 1},
        {"contractAddress": "0xb92aa4a864daf0d6a509e73a9364feba44384965", "events": 3, "functions": 24, "modifiers": 1, "payable": 1},
    ]}});
    ensure!(got == want, "functions_gt query returned {got}");
    let got = respond(address_query, &Map::new(), &store, 1000).body;
    let want = json!({"data": {"metrics": [
        {"contractAddress": "0x536c7efeebff067a69393133b1c87a163a6b0598", "transactions": 639, "balance": 0}
    ]}});
    ensure!(got == want, "address_eq query returned {got}");
    Ok(())
}

// Analyzer -------------------------------------------------------------------

fn analyzer_suite() -> Outcome {
    let mut files: Vec<PathBuf> = fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "sol"))
        .collect();
    files.sort();
    ensure!(files.len() >= 20, "only {} fixtures", files.len());
    for path in &files {
        let bytes = fs::read(path).unwrap();
        let want: Value = serde_json::from_str(&fs::read_to_string(path.with_extension("expected")).unwrap()).unwrap();
        let got = serde_json::to_value(analyze(&SourceText::from_bytes(bytes.clone()).unwrap())).unwrap();
        ensure!(got == want, "{}: got {got}, hand count {want}", path.display());

        // Keyword-laden comments and strings only add physical lines.
        let mut text = String::from_utf8(bytes).unwrap();
        let trapped_from_open_state = text.contains("/*") && !text.contains("*/")
            || path.file_stem().is_some_and(|s| s.to_string_lossy().starts_with("unterminated"));
        if trapped_from_open_state {
            continue;
        }
        if !text.is_empty() && !text.ends_with('\n') {
            text.push('\n');
        }
        let base = analyze(&SourceText::from(text.as_str()));
        text.push_str("// function event modifier payable mapping address pragma solidity ^9.9.9;\n");
        text.push_str("/* contract X { function f() public payable {} event E(); modifier m() { _; }\n");
        text.push_str("   mapping(address => uint) m; address a; } */\n");
        let trapped = analyze(&SourceText::from(text.as_str()));
        let mut expect = serde_json::to_value(&base).unwrap();
        expect["sloc"] = json!(base.sloc + 3);
        let trapped = serde_json::to_value(&trapped).unwrap();
        ensure!(trapped == expect, "{}: comment trap changed {trapped} vs {expect}", path.display());
    }
    Ok(())
}

// Dedup ----------------------------------------------------------------------

fn shard_files(root: &Path) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for entry in fs::read_dir(root).unwrap() {
        let entry = entry.unwrap();
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.path().is_dir() && name.len() == 2 && name.bytes().all(|b| b.is_ascii_hexdigit()) {
            for f in fs::read_dir(entry.path()).unwrap() {
                out.insert(format!("{name}/{}", f.unwrap().file_name().to_string_lossy()));
            }
        }
    }
    out
}

fn dedup() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10_010);
    let sources: Vec<String> = (0..10)
        .map(|i| {
            format!("pragma solidity ^0.7.{i};\ncontract D{i} {{\n    uint x{i};\n    function f() public {{}}\n}}\n")
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::open(dir.path()).unwrap();
    let mut addresses = BTreeSet::new();
    while addresses.len() < 100 {
        addresses.insert(ContractAddress::from_bytes(rng.gen()));
    }
    let mut addresses: Vec<_> = addresses.into_iter().collect();
    addresses.shuffle(&mut rng);
    // Every source at least once, the rest at random.
    let mut picks: Vec<usize> = (0..10).chain((10..100).map(|_| rng.gen_range(0..10))).collect();
    picks.shuffle(&mut rng);
    let mut first_owner: BTreeMap<usize, ContractAddress> = BTreeMap::new();
    for (a, &s) in addresses.iter().zip(&picks) {
        first_owner.entry(s).or_insert(*a);
        store
            .put(*a, ContractArtifacts::new(sources[s].as_str(), "[]", "0x00"), ExtrinsicMetrics::default(), 0)
            .unwrap();
    }
    let docs = store.scan(|_| true);
    let canonical: Vec<_> = docs.iter().filter(|d| d.duplicate_of.is_none()).collect();
    let dups: Vec<_> = docs.iter().filter(|d| d.duplicate_of.is_some()).collect();
    ensure!(canonical.len() == 10, "{} canonical", canonical.len());
    ensure!(dups.len() == 90, "{} duplicates", dups.len());
    let canonical_set: BTreeSet<ContractAddress> = canonical.iter().map(|d| d.address).collect();
    ensure!(
        canonical_set == first_owner.values().copied().collect(),
        "canonical entries are not the first put of each source"
    );
    for d in &dups {
        let target = d.duplicate_of.unwrap();
        ensure!(canonical_set.contains(&target), "{} points at non-canonical {target}", d.address);
    }
    let files = shard_files(store.root());
    ensure!(files.len() == 30, "{} artifact files", files.len());
    let mut expected = BTreeSet::new();
    for a in &canonical_set {
        let hex = a.to_string();
        for ext in ["sol", "abi", "bytecode"] {
            expected.insert(format!("{}/{hex}.{ext}", &hex[2..4]));
        }
    }
    ensure!(files == expected, "artifact file names differ: {files:?}");
    Ok(())
}

// Query oracle ---------------------------------------------------------------

#[derive(Clone, Copy, PartialEq)]
enum Kind {
    Unsigned,
    Fixed,
    Text,
}

/// (query name, JSON path in the stored document, comparison)
const FIELDS: &[(&str, &[&str], Kind)] = &[
    ("address", &["address"], Kind::Text),
    ("pragma", &["intrinsic", "pragma"], Kind::Text),
    ("sloc", &["intrinsic", "sloc"], Kind::Unsigned),
    ("functions", &["intrinsic", "functions"], Kind::Unsigned),
    ("events", &["intrinsic", "events"], Kind::Unsigned),
    ("modifiers", &["intrinsic", "modifiers"], Kind::Unsigned),
    ("payable", &["intrinsic", "payable"], Kind::Unsigned),
    ("mapping", &["intrinsic", "mapping"], Kind::Unsigned),
    ("addressVars", &["intrinsic", "addressVars"], Kind::Unsigned),
    ("transactions", &["extrinsic", "transactions"], Kind::Unsigned),
    ("balance", &["extrinsic", "balance"], Kind::Unsigned),
    ("etherValue", &["extrinsic", "etherValue"], Kind::Fixed),
    ("retrievedAt", &["retrievedAt"], Kind::Unsigned),
    ("duplicateOf", &["duplicateOf"], Kind::Text),
];

fn field_value<'a>(doc: &'a Value, path: &[&str]) -> Option<&'a Value> {
    path.iter().try_fold(doc, |v, p| v.get(p)).filter(|v| !v.is_null())
}

/// Decimal text as a pair (integer part, fraction padded to 20 digits), compared lexicographically.
fn fixed_key(text: &str) -> (u128, u128) {
    let (whole, frac) = text.split_once('.').unwrap_or((text, ""));
    let frac = format!("{frac:0<20}");
    (whole.parse().unwrap(), frac[..20].parse().unwrap())
}

fn compare(kind: Kind, stored: &Value, literal: &str) -> std::cmp::Ordering {
    let text = match stored {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    match kind {
        Kind::Unsigned => text.parse::<u128>().unwrap().cmp(&literal.parse::<u128>().unwrap()),
        Kind::Fixed => fixed_key(&text).cmp(&fixed_key(literal)),
        Kind::Text => text.as_str().cmp(literal),
    }
}

struct Predicate {
    field: usize,
    op: &'static str,
    literal: String,
}

impl Predicate {
    fn text(&self) -> String {
        let (name, _, kind) = FIELDS[self.field];
        let lit = if kind == Kind::Text { format!("{:?}", self.literal) } else { self.literal.clone() };
        format!("{name}_{}: {lit}", self.op)
    }

    fn oracle(&self, doc: &Value) -> bool {
        use std::cmp::Ordering::*;
        let (_, path, kind) = FIELDS[self.field];
        let Some(v) = field_value(doc, path) else { return false };
        let ord = compare(kind, v, &self.literal);
        match self.op {
            "eq" => ord == Equal,
            "ne" => ord != Equal,
            "gt" => ord == Greater,
            "gte" => ord != Less,
            "lt" => ord == Less,
            "lte" => ord != Greater,
            _ => unreachable!(),
        }
    }
}

fn random_doc_source(rng: &mut StdRng) -> String {
    let mut s = format!("pragma solidity ^0.{}.0;\ncontract Q {{\n", rng.gen_range(4..9));
    for i in 0..rng.gen_range(0..25) {
        s.push_str(&match rng.gen_range(0..6) {
            0 => format!("  function p{i}() public payable {{}}\n"),
            1 => format!("  function v{i}(address who) public view {{}}\n"),
            2 => format!("  event Ev{i}();\n"),
            3 => format!("  modifier only{i}() {{ _; }}\n"),
            4 => format!("  mapping(uint => address) t{i};\n"),
            _ => format!("  /* function hidden{i}() */ address a{i};\n"),
        });
    }
    s + "}\n"
}

fn random_predicate(rng: &mut StdRng, docs: &[Value]) -> Predicate {
    let field = rng.gen_range(0..FIELDS.len());
    let (name, path, kind) = FIELDS[field];
    let op = if kind == Kind::Text {
        ["eq", "ne"][rng.gen_range(0..2)]
    } else {
        ["eq", "ne", "gt", "gte", "lt", "lte"][rng.gen_range(0..6)]
    };
    let existing: Vec<&Value> = docs.iter().filter_map(|d| field_value(d, path)).collect();
    let literal = if !existing.is_empty() && rng.gen_bool(0.6) {
        match existing.choose(rng).unwrap() {
            Value::String(s) => s.clone(),
            v => v.to_string(),
        }
    } else {
        match (kind, name) {
            (Kind::Unsigned, "retrievedAt") => rng.gen_range(1_500_000_000..1_700_000_000u64).to_string(),
            (Kind::Unsigned, "balance") => rng.gen::<u128>().to_string(),
            (Kind::Unsigned, _) => rng.gen_range(0..50u32).to_string(),
            (Kind::Fixed, _) => format!("{}.{}", rng.gen_range(0..100), rng.gen_range(0..100)),
            (Kind::Text, "pragma") => format!("^0.{}.0", rng.gen_range(4..9)),
            (Kind::Text, _) => ContractAddress::from_bytes(rng.gen()).to_string(),
        }
    };
    Predicate { field, op, literal }
}

fn engine(store: &CorpusStore, preds: &[&Predicate]) -> Result<Vec<String>, String> {
    let filter: Vec<String> = preds.iter().map(|p| p.text()).collect();
    let text = format!("{{ metrics(query:{{{}}}) {{ address }} }}", filter.join(", "));
    let q = parse_query(&text, &Map::new()).map_err(|e| format!("{text}: {e}"))?;
    Ok(execute(&q, store).rows.iter().map(|r| r["contractAddress"].as_str().unwrap().to_string()).collect())
}

fn linear_filter(docs: &[Value], preds: &[&Predicate]) -> Vec<String> {
    let mut hits: Vec<String> = docs
        .iter()
        .filter(|d| preds.iter().all(|p| p.oracle(d)))
        .map(|d| d["address"].as_str().unwrap().to_string())
        .collect();
    hits.sort();
    hits
}

fn query_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(500);
    let mut single = 0;
    let mut pairs = 0;
    while single < 500 {
        let dir = tempfile::tempdir().unwrap();
        let store = CorpusStore::open(dir.path()).unwrap();
        let pool: Vec<String> = (0..rng.gen_range(1..8)).map(|_| random_doc_source(&mut rng)).collect();
        let size = rng.gen_range(0..=200);
        let mut seen = BTreeSet::new();
        while seen.len() < size {
            let a = ContractAddress::from_bytes(rng.gen());
            if !seen.insert(a) {
                continue;
            }
            let ext = ExtrinsicMetrics {
                transactions: rng.gen_range(0..60),
                balance: if rng.gen_bool(0.5) { rng.gen_range(0..10) } else { rng.gen() },
                ether_value: format!("{}.{}", rng.gen_range(0..100), rng.gen_range(0..1000)).parse().unwrap(),
                ..Default::default()
            };
            let src = pool.choose(&mut rng).unwrap().clone();
            store
                .put(a, ContractArtifacts::new(src, "", ""), ext, rng.gen_range(1_500_000_000..1_700_000_000))
                .unwrap();
        }
        let docs: Vec<Value> = store.scan(|_| true).iter().map(|d| serde_json::to_value(d).unwrap()).collect();
        for _ in 0..20 {
            let p = random_predicate(&mut rng, &docs);
            let got = engine(&store, &[&p])?;
            let want = linear_filter(&docs, &[&p]);
            ensure!(got == want, "{}: engine {} rows, oracle {}", p.text(), got.len(), want.len());
            single += 1;

            let q = random_predicate(&mut rng, &docs);
            let both = engine(&store, &[&p, &q])?;
            let a: BTreeSet<String> = want.into_iter().collect();
            let b: BTreeSet<String> = linear_filter(&docs, &[&q]).into_iter().collect();
            let inter: Vec<String> = a.intersection(&b).cloned().collect();
            ensure!(both == inter, "{} AND {}", p.text(), q.text());
            pairs += 1;
        }
    }
    ensure!(pairs >= 500, "{pairs} conjunction trials");
    Ok(())
}

// Fixture ingest -------------------------------------------------------------

const START: Duration = Duration::from_secs(1_704_067_200);

fn fixture_scan(store: &CorpusStore) -> IngestReport {
    let throttle = Throttle::new(RateLimit::new(2.0, None).unwrap(), Arc::new(ManualClock::new(START)));
    scan_blocks(&FixtureExplorer::new(fixtures()), 100..=105, &throttle, store, &ExtractionRule::default()).unwrap()
}

fn fixture_ingest() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::open(dir.path()).unwrap();

    // The committed chain, by construction: six block numbers of which 103 is
    // absent; creations of C1, C2, C3, C4, C5; C3 reuses C1's source; C4 has
    // no verified page.
    let report = fixture_scan(&store);
    let want = IngestReport {
        blocks_scanned: 5,
        addresses_seen: 5,
        already_stored: 0,
        not_verified: 1,
        verified_fetched: 4,
        new_canonical: 3,
        duplicates: 1,
        failures: vec![],
        block_failures: vec![],
    };
    ensure!(report == want, "first report {report:?}");

    let c1 = addr("0x1111111111111111111111111111111111111111");
    let c3 = addr("0x3333333333333333333333333333333333333333");
    let c4 = addr("0x4444444444444444444444444444444444444444");
    ensure!(store.len() == 4, "{} documents", store.len());
    ensure!(!store.contains(&c4), "unverified contract stored");
    ensure!(store.document(&c3).unwrap().duplicate_of == Some(c1), "C3 not a duplicate of C1");
    let docs = store.scan(|_| true);
    for d in &docs {
        if let Some(t) = d.duplicate_of {
            let target = store.document(&t).unwrap();
            ensure!(
                target.duplicate_of.is_none() && target.source_hash == d.source_hash,
                "bad duplicate {}",
                d.address
            );
        }
    }
    let expected_files: BTreeSet<String> = docs
        .iter()
        .filter(|d| d.duplicate_of.is_none())
        .flat_map(|d| {
            let hex = d.address.to_string();
            ["sol", "abi", "bytecode"].map(|ext| format!("{}/{hex}.{ext}", &hex[2..4]))
        })
        .collect();
    ensure!(shard_files(store.root()) == expected_files, "artifact files inconsistent");

    let second = fixture_scan(&store);
    ensure!(second.verified_fetched == 0, "second run fetched {}", second.verified_fetched);
    ensure!(second.already_stored == 4, "second run alreadyStored {}", second.already_stored);
    ensure!(store.scan(|_| true) == docs, "second run changed documents");
    Ok(())
}

// Rate limit -----------------------------------------------------------------

/// Records the clock at every call it forwards.
struct Recording<C> {
    inner: C,
    clock: Arc<dyn Clock>,
    log: Mutex<Vec<Duration>>,
}

impl<C: ExplorerClient> Recording<C> {
    fn mark(&self) {
        self.log.lock().unwrap().push(self.clock.now());
    }
}

impl<C: ExplorerClient> ExplorerClient for Recording<C> {
    fn list_block_transactions(&self, block: u64) -> Result<Vec<ChainTransaction>, ClientError> {
        self.mark();
        self.inner.list_block_transactions(block)
    }

    fn fetch_contract_page(&self, address: &ContractAddress) -> Result<ContractPage, ClientError> {
        self.mark();
        self.inner.fetch_contract_page(address)
    }

    fn fetch_extrinsic(&self, address: &ContractAddress) -> Result<ExtrinsicMetrics, ClientError> {
        self.mark();
        self.inner.fetch_extrinsic(address)
    }
}

fn rate_limit() -> Outcome {
    // 16 blocks with one verified creation each (3 requests apiece) plus two
    // absent block numbers: 50 requests.
    let chain = tempfile::tempdir().unwrap();
    let w = FixtureWriter::create(chain.path()).unwrap();
    let deployer = addr("0x00000000000000000000000000000000000000aa");
    for n in 1..=16u8 {
        let mut b = [0u8; 20];
        b[0] = 0xc0;
        b[19] = n;
        let c = ContractAddress::from_bytes(b);
        w.block(n as u64, vec![ChainTransaction { from: deployer, to: Some(c), is_contract_creation: true }]).unwrap();
        let src = format!("contract R{n} {{ uint v = {n}; }}\n");
        w.verified(&c, &ContractArtifacts::new(src, "[]", "0x00"), &ExtrinsicMetrics::default()).unwrap();
    }
    let clock: Arc<dyn Clock> = Arc::new(ManualClock::new(START + Duration::from_millis(337)));
    let throttle = Throttle::new(RateLimit::new(2.0, None).unwrap(), Arc::clone(&clock));
    let client = Recording { inner: FixtureExplorer::new(chain.path()), clock, log: Mutex::new(Vec::new()) };
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::open(dir.path()).unwrap();
    let report = scan_blocks(&client, 1..=18, &throttle, &store, &ExtractionRule::default()).unwrap();
    ensure!(report.verified_fetched == 16, "fetched {}", report.verified_fetched);

    let log = client.log.into_inner().unwrap();
    ensure!(log.len() == 50, "{} requests recorded", log.len());
    // Every window [t, t + 1 s) starting at a request; windows starting
    // elsewhere hold no more than the one starting at the next request.
    let mut sorted = log.clone();
    sorted.sort();
    let second = Duration::from_secs(1);
    for (i, &t) in sorted.iter().enumerate() {
        let inside = sorted[i..].iter().take_while(|&&u| u < t + second).count();
        ensure!(inside <= 2, "{inside} requests in the second starting at {t:?}");
    }
    ensure!(sorted == throttle.admission_log(), "requests were issued off the admission schedule");
    Ok(())
}

// Round trip -----------------------------------------------------------------

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec())
}

fn unzip(bytes: &[u8]) -> BTreeMap<String, Vec<u8>> {
    let mut z = zip::ZipArchive::new(Cursor::new(bytes)).unwrap();
    (0..z.len())
        .map(|i| {
            let mut f = z.by_index(i).unwrap();
            let mut buf = Vec::new();
            f.read_to_end(&mut buf).unwrap();
            (f.name().to_string(), buf)
        })
        .collect()
}

fn round_trip() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let store = CorpusStore::open(dir.path()).unwrap();
    let mut ingested: BTreeMap<ContractAddress, Vec<u8>> = BTreeMap::new();

    // Through the fixture pipeline; the ingested bytes are what the pages were built from.
    fixture_scan(&store);
    let shared = b"pragma solidity ^0.4.24;\n\ncontract Shared {\n    uint256 public n;\n    function bump() public payable { n += 1; }\n}\n";
    ingested.insert(addr("0x1111111111111111111111111111111111111111"), shared.to_vec());
    ingested.insert(addr("0x3333333333333333333333333333333333333333"), shared.to_vec());
    ingested.insert(
        addr("0x2222222222222222222222222222222222222222"),
        b"pragma solidity ^0.5.0;\n\ncontract Second {\n    event Ping(address indexed who);\n    function ping() external { emit Ping(msg.sender); }\n}\n".to_vec(),
    );
    let seed = "0xb7f4c286851cbf0cbf2fe8ebf40412b196c0e8ad";
    ingested.insert(addr(seed), fs::read(fixtures().join("sources").join(format!("{seed}.sol"))).unwrap());

    // Direct puts with awkward bytes: CRLF, tabs, non-ASCII, no trailing newline.
    let mut rng = StdRng::seed_from_u64(41);
    for i in 0..40 {
        let a = ContractAddress::from_bytes(rng.gen());
        let mut src = format!("contract T{i} {{\r\n\tstring s = \"é→✓ {i}\";\r\n");
        for _ in 0..rng.gen_range(0..5) {
            src.push_str(["  // ünïcødé\n", "\tuint x;\r\n", "   \n", "/* * */\n"][rng.gen_range(0..4)]);
        }
        src.push('}');
        if i % 5 == 0 {
            src = ingested.values().next().map(|b| String::from_utf8(b.clone()).unwrap()).unwrap();
        }
        ingested.insert(a, src.clone().into_bytes());
        store.put(a, ContractArtifacts::new(src, "[]", "0x60"), ExtrinsicMetrics::default(), 0).unwrap();
    }

    let app = router(Arc::new(store), &ServiceConfig::new(dir.path()));
    let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
    rt.block_on(async {
        let mut gets: BTreeMap<ContractAddress, BTreeMap<&str, Vec<u8>>> = BTreeMap::new();
        for (a, want) in &ingested {
            let mut per_kind = BTreeMap::new();
            for (kind, ext) in [("source", "sol"), ("abi", "abi"), ("bytecode", "bytecode")] {
                let (status, body) =
                    call(&app, Request::get(format!("/contracts/{a}/{kind}")).body(Body::empty()).unwrap()).await;
                ensure!(status == StatusCode::OK, "GET {a}/{kind}: {status}");
                per_kind.insert(ext, body);
            }
            ensure!(&per_kind["sol"] == want, "GET {a}/source differs from ingested bytes");
            gets.insert(*a, per_kind);
        }
        let list: Vec<String> = ingested.keys().map(|a| a.to_string()).collect();
        let req = Request::post("/download")
            .header(header::CONTENT_TYPE, "application/json")
            .body(Body::from(json!({ "addresses": list }).to_string()))
            .unwrap();
        let (status, zip) = call(&app, req).await;
        ensure!(status == StatusCode::OK, "download: {status}");
        let entries = unzip(&zip);
        for (a, per_kind) in &gets {
            let hex = a.to_string();
            for (ext, bytes) in per_kind {
                let name = format!("{}/{hex}.{ext}", &hex[2..4]);
                let entry = entries.get(&name).ok_or_else(|| format!("archive lacks {name}"))?;
                ensure!(entry == bytes, "archive entry {name} differs from GET");
            }
        }
        Ok(())
    })
}
