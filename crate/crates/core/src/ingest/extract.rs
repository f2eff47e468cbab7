//! Recovers contract artifacts from an explorer's verified-source page.
//!
//! The page embeds each artifact as the text content of a container element
//! located by its `id`. Tags inside the container are removed, entities are
//! decoded, and every other byte (line breaks included) is kept as is.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::SourceText;
use crate::store::ContractArtifacts;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractionError {
    #[error("container #{0} not found in page")]
    MissingContainer(String),
    #[error("container #{0} is not closed")]
    UnclosedContainer(String),
    #[error("source container #{0} is empty")]
    EmptySource(String),
}

/// Element ids of the three artifact containers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractionRule {
    pub source_id: String,
    pub abi_id: String,
    pub bytecode_id: String,
}

impl Default for ExtractionRule {
    /// The ids used by EtherScan's contract code tab.
    fn default() -> Self {
        Self { source_id: "editor".into(), abi_id: "js-copytextarea2".into(), bytecode_id: "verifiedbytecode2".into() }
    }
}

pub fn extract_source(html: &str, rule: &ExtractionRule) -> Result<ContractArtifacts, ExtractionError> {
    let source = container_text(html, &rule.source_id)?;
    if source.is_empty() {
        return Err(ExtractionError::EmptySource(rule.source_id.clone()));
    }
    let abi = container_text(html, &rule.abi_id)?;
    let bytecode = container_text(html, &rule.bytecode_id)?;
    Ok(ContractArtifacts { source: SourceText::from(source), abi, bytecode })
}

/// Decoded text content of the element with the given id.
pub fn container_text(html: &str, id: &str) -> Result<String, ExtractionError> {
    let (name, inner_start) =
        find_element_by_id(html, id).ok_or_else(|| ExtractionError::MissingContainer(id.to_string()))?;
    let inner_end = find_matching_close(html, inner_start, &name)
        .ok_or_else(|| ExtractionError::UnclosedContainer(id.to_string()))?;
    Ok(decode_entities(&strip_tags(&html[inner_start..inner_end])))
}

#[derive(Debug)]
struct Tag<'a> {
    name: String,
    closing: bool,
    self_closing: bool,
    attrs: Vec<(&'a str, &'a str)>,
    /// Byte offset just past `>`.
    end: usize,
}

fn looks_like_tag(html: &str, lt: usize) -> bool {
    html[lt + 1..].chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '/' || c == '!' || c == '?')
}

/// Parses the tag starting at `lt` (which must be `<`). Comments, doctypes
/// and processing instructions come back as `None` along with their end.
fn parse_tag(html: &str, lt: usize) -> Result<Tag<'_>, Option<usize>> {
    let rest = &html[lt..];
    if rest.starts_with("<!--") {
        return Err(Some(rest.find("-->").map_or(html.len(), |p| lt + p + 3)));
    }
    if rest.starts_with("<!") || rest.starts_with("<?") {
        return Err(Some(rest.find('>').map_or(html.len(), |p| lt + p + 1)));
    }
    let bytes = html.as_bytes();
    let mut i = lt + 1;
    let closing = bytes.get(i) == Some(&b'/');
    if closing {
        i += 1;
    }
    let name_start = i;
    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'-') {
        i += 1;
    }
    if i == name_start {
        return Err(None);
    }
    let name = html[name_start..i].to_ascii_lowercase();
    let mut attrs = Vec::new();
    let mut self_closing = false;
    loop {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        match bytes.get(i).copied() {
            None => return Err(None),
            Some(b'>') => {
                i += 1;
                break;
            }
            Some(b'/') => {
                self_closing = true;
                i += 1;
                continue;
            }
            _ => {}
        }
        let an_start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !matches!(bytes[i], b'=' | b'>' | b'/') {
            i += 1;
        }
        let attr_name = &html[an_start..i];
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        let mut value = "";
        if bytes.get(i) == Some(&b'=') {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_whitespace() {
                i += 1;
            }
            match bytes.get(i).copied() {
                Some(q @ (b'"' | b'\'')) => {
                    let v_start = i + 1;
                    let v_end = html[v_start..].find(q as char).map(|p| v_start + p).ok_or(None)?;
                    value = &html[v_start..v_end];
                    i = v_end + 1;
                }
                _ => {
                    let v_start = i;
                    while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'>' {
                        i += 1;
                    }
                    value = &html[v_start..i];
                }
            }
        }
        if attr_name.is_empty() {
            i += 1;
        } else {
            attrs.push((attr_name, value));
        }
    }
    Ok(Tag { name, closing, self_closing, attrs, end: i })
}

fn find_element_by_id(html: &str, id: &str) -> Option<(String, usize)> {
    let mut pos = 0;
    while let Some(off) = html[pos..].find('<') {
        let lt = pos + off;
        if !looks_like_tag(html, lt) {
            pos = lt + 1;
            continue;
        }
        match parse_tag(html, lt) {
            Ok(tag) => {
                if !tag.closing && tag.attrs.iter().any(|(k, v)| k.eq_ignore_ascii_case("id") && *v == id) {
                    return Some((tag.name, tag.end));
                }
                pos = tag.end;
            }
            Err(Some(end)) => pos = end,
            Err(None) => pos = lt + 1,
        }
    }
    None
}

/// Offset of the `</name>` that closes the element whose content starts at
/// `from`, honoring nested elements of the same name.
fn find_matching_close(html: &str, from: usize, name: &str) -> Option<usize> {
    let mut depth = 1usize;
    let mut pos = from;
    while let Some(off) = html[pos..].find('<') {
        let lt = pos + off;
        if !looks_like_tag(html, lt) {
            pos = lt + 1;
            continue;
        }
        match parse_tag(html, lt) {
            Ok(tag) => {
                if tag.name == name {
                    if tag.closing {
                        depth -= 1;
                        if depth == 0 {
                            return Some(lt);
                        }
                    } else if !tag.self_closing {
                        depth += 1;
                    }
                }
                pos = tag.end;
            }
            Err(Some(end)) => pos = end,
            Err(None) => pos = lt + 1,
        }
    }
    None
}

/// Removes markup, keeping text exactly. A `<` that cannot start a tag is text.
pub fn strip_tags(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut pos = 0;
    while let Some(off) = html[pos..].find('<') {
        let lt = pos + off;
        out.push_str(&html[pos..lt]);
        if !looks_like_tag(html, lt) {
            out.push('<');
            pos = lt + 1;
            continue;
        }
        match parse_tag(html, lt) {
            Ok(tag) => pos = tag.end,
            Err(Some(end)) => pos = end,
            Err(None) => {
                out.push('<');
                pos = lt + 1;
            }
        }
    }
    out.push_str(&html[pos..]);
    out
}

pub fn decode_entities(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let decoded = rest.find(';').filter(|&semi| semi <= 12).and_then(|semi| {
            let body = &rest[1..semi];
            let c = match body {
                "lt" => Some('<'),
                "gt" => Some('>'),
                "amp" => Some('&'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "nbsp" => Some('\u{a0}'),
                _ => body.strip_prefix('#').and_then(|num| {
                    let code = match num.strip_prefix(['x', 'X']) {
                        Some(h) => u32::from_str_radix(h, 16).ok(),
                        None => num.parse::<u32>().ok(),
                    };
                    code.and_then(char::from_u32)
                }),
            };
            c.map(|c| (c, semi + 1))
        });
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &rest[len..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + text.len() / 8);
    for c in text.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Renders a verified-contract page in the explorer's layout. Fixture
/// explorers are built from this, and [`extract_source`] inverts it.
pub fn render_contract_page(address: &str, artifacts: &ContractArtifacts, rule: &ExtractionRule) -> String {
    format!(
        r#"<!doctype html>
<html lang="en">
<head>
<meta charset="utf-8">
<title>Contract {addr} | Explorer</title>
<script>var cutoff = 3; if (cutoff < 5 && cutoff > 1) {{ console.log("ready"); }}</script>
</head>
<body>
<header class="navbar"><a href="/">Home</a> &gt; <a href="/address/{addr}">{addr}</a></header>
<div id="ContentPlaceHolder1_contractCodeDiv" class="tab-pane">
  <div class="d-flex"><span class="text-success"><i class="fa fa-check-circle"></i></span> <b>Contract Source Code Verified</b> (Exact Match)</div>
  <div class="mb-4"><span class="h6">Contract Source Code</span> <span class="text-secondary">(Solidity)</span></div>
  <pre class='js-sourcecopyarea editor' id='{src_id}' style='margin-top: 5px;'>{source}</pre>
  <div class="mb-4"><span class="h6">Contract ABI</span> <!-- copy button --></div>
  <pre class="wordwrap js-copytextarea2" id="{abi_id}" style="height: 200px; max-height: 400px; margin-top: 5px;">{abi}</pre>
  <div class="mb-4"><span class="h6">Deployed Bytecode</span></div>
  <div id="{bytecode_id}" class="wordwrap">{bytecode}</div>
</div>
<footer><span>&copy; Explorer</span></footer>
</body>
</html>
"#,
        addr = address,
        src_id = rule.source_id,
        abi_id = rule.abi_id,
        bytecode_id = rule.bytecode_id,
        source = escape_html(artifacts.source.as_str()),
        abi = escape_html(&artifacts.abi),
        bytecode = escape_html(&artifacts.bytecode),
    )
}
