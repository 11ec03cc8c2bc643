//! Simplified wiki markup extractor: section tree, lists, tables and links.
//!
//! Only the subset of markup that carries listings is understood. Templates
//! are dropped, not expanded.

use std::collections::{BTreeSet, HashMap};

use crate::corpus::{LinkKind, Listing, ListingContext, ListingKind, Mention, Page, Row};
use crate::text::{collapse_whitespace, normalize_title};

/// A parsed page plus any non-fatal problems met while parsing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub page: Page,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Text(String),
    Link { target: String, label: String },
}

#[derive(Default, Clone)]
struct SectionState {
    top_section: String,
    top_entities: Vec<String>,
    section: String,
    section_entities: Vec<String>,
}

impl SectionState {
    fn context(&self, page_entity: &str) -> ListingContext {
        ListingContext {
            page_entity: page_entity.to_string(),
            top_section: self.top_section.clone(),
            section: self.section.clone(),
            top_section_entities: self.top_entities.clone(),
            section_entities: self.section_entities.clone(),
        }
    }
}

/// Parses one page of markup. The page title doubles as page id and page
/// entity. Never fails; malformed tables are skipped with a warning.
pub fn extract_from_wikitext(markup: &str, page_title: &str, known_pages: &BTreeSet<String>) -> Extraction {
    let page_id = page_title.to_string();
    let lines: Vec<&str> = markup.lines().collect();
    let mut warnings = Vec::new();
    let mut state = SectionState::default();
    let mut listings: Vec<(ListingKind, Vec<Row>, Vec<String>, ListingContext)> = Vec::new();

    let mut i = 0;
    while i < lines.len() {
        let line = lines[i].trim_end();
        let trimmed = line.trim_start();
        if let Some((level, content)) = parse_heading(trimmed) {
            let segments = parse_inline(content);
            let title = normalize_title(&plain_text(&segments));
            let entities: Vec<String> = segments
                .iter()
                .filter_map(|s| match s {
                    Segment::Link { target, .. } => Some(target.clone()),
                    Segment::Text(_) => None,
                })
                .collect();
            match level {
                0..=2 => {
                    state = SectionState {
                        top_section: title.clone(),
                        top_entities: entities.clone(),
                        section: title,
                        section_entities: entities,
                    };
                }
                3 => {
                    state.section = title;
                    state.section_entities = entities;
                }
                _ => {}
            }
            i += 1;
        } else if line.starts_with('*') || line.starts_with('#') {
            let start = i;
            while i < lines.len() && (lines[i].starts_with('*') || lines[i].starts_with('#')) {
                i += 1;
            }
            let rows = parse_list(&lines[start..i], known_pages);
            listings.push((ListingKind::List, rows, Vec::new(), state.context(&page_id)));
        } else if trimmed.starts_with("{|") {
            match find_table_end(&lines, i) {
                Some(end) => {
                    let (rows, headers, nested) = parse_table(&lines[i..=end], known_pages);
                    if nested {
                        warnings.push(format!("line {}: nested table ignored", i + 1));
                    }
                    listings.push((ListingKind::Table, rows, headers, state.context(&page_id)));
                    i = end + 1;
                }
                None => {
                    warnings.push(format!("line {}: unbalanced table markup, block skipped", i + 1));
                    i += 1;
                    while i < lines.len() && parse_heading(lines[i].trim()).is_none() {
                        i += 1;
                    }
                }
            }
        } else {
            if trimmed.starts_with("|}") {
                warnings.push(format!("line {}: table close without open", i + 1));
            }
            i += 1;
        }
    }

    let listings = listings
        .into_iter()
        .enumerate()
        .map(|(idx, (kind, rows, headers, context))| Listing {
            listing_id: format!("{page_id}::{idx}"),
            kind,
            rows,
            context,
            headers,
        })
        .collect();

    Extraction {
        page: Page {
            page_id: page_id.clone(),
            title: page_title.to_string(),
            page_entity: page_id,
            listings,
        },
        warnings,
    }
}

fn parse_heading(line: &str) -> Option<(usize, &str)> {
    let line = line.trim();
    if !line.starts_with('=') || !line.ends_with('=') || line.len() < 3 {
        return None;
    }
    let lead = line.chars().take_while(|&c| c == '=').count();
    let trail = line.chars().rev().take_while(|&c| c == '=').count();
    let level = lead.min(trail);
    if 2 * level >= line.len() {
        return None;
    }
    Some((level, line[level..line.len() - level].trim()))
}

fn parse_list(lines: &[&str], known: &BTreeSet<String>) -> Vec<Row> {
    let items: Vec<(usize, &str)> = lines
        .iter()
        .map(|l| {
            let depth = l.chars().take_while(|c| matches!(c, '*' | '#' | ':' | ';')).count();
            (depth, &l[depth..])
        })
        .collect();
    let mut rows = Vec::new();
    for (idx, (depth, content)) in items.iter().enumerate() {
        let has_children = items.get(idx + 1).is_some_and(|(d, _)| d > depth);
        if has_children {
            continue;
        }
        let mentions = segments_to_mentions(&parse_inline(content), known, None);
        if !mentions.is_empty() {
            rows.push(Row::new(mentions));
        }
    }
    rows
}

fn find_table_end(lines: &[&str], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (offset, line) in lines[start..].iter().enumerate() {
        let t = line.trim_start();
        if offset > 0 && parse_heading(t).is_some() {
            return None;
        }
        if t.starts_with("{|") {
            depth += 1;
        } else if t.starts_with("|}") {
            depth -= 1;
            if depth == 0 {
                return Some(start + offset);
            }
        }
    }
    None
}

/// Returns data rows, header cells and whether a nested table was dropped.
fn parse_table(lines: &[&str], known: &BTreeSet<String>) -> (Vec<Row>, Vec<String>, bool) {
    struct RawRow {
        cells: Vec<(bool, String)>,
    }
    let mut raw_rows: Vec<RawRow> = vec![RawRow { cells: Vec::new() }];
    let mut depth = 0usize;
    let mut nested = false;
    for line in lines {
        let t = line.trim();
        if t.starts_with("{|") {
            depth += 1;
            if depth > 1 {
                nested = true;
            }
            continue;
        }
        if t.starts_with("|}") {
            depth = depth.saturating_sub(1);
            continue;
        }
        if depth > 1 {
            continue;
        }
        if t.starts_with("|-") {
            raw_rows.push(RawRow { cells: Vec::new() });
        } else if t.starts_with("|+") {
            continue;
        } else if let Some(rest) = t.strip_prefix('!') {
            let row = raw_rows.last_mut().expect("row");
            for cell in split_cells(rest, &["!!", "||"]) {
                row.cells.push((true, strip_cell_attributes(&cell)));
            }
        } else if let Some(rest) = t.strip_prefix('|') {
            let row = raw_rows.last_mut().expect("row");
            for cell in split_cells(rest, &["||"]) {
                row.cells.push((false, strip_cell_attributes(&cell)));
            }
        } else if !t.is_empty() {
            if let Some(last) = raw_rows.last_mut().and_then(|r| r.cells.last_mut()) {
                last.1.push(' ');
                last.1.push_str(t);
            }
        }
    }

    let mut rows = Vec::new();
    let mut headers = Vec::new();
    for raw in raw_rows.into_iter().filter(|r| !r.cells.is_empty()) {
        if raw.cells.iter().all(|(h, _)| *h) {
            headers.extend(
                raw.cells
                    .iter()
                    .map(|(_, c)| collapse_whitespace(&plain_text(&parse_inline(c)))),
            );
            continue;
        }
        let mut mentions = Vec::new();
        for (col, (_, cell)) in raw.cells.iter().enumerate() {
            mentions.extend(segments_to_mentions(&parse_inline(cell), known, Some(col)));
        }
        if !mentions.is_empty() {
            rows.push(Row::new(mentions));
        }
    }
    (rows, headers, nested)
}

fn split_cells(s: &str, seps: &[&str]) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut link_depth = 0i32;
    let mut tmpl_depth = 0i32;
    let mut i = 0;
    let bytes = s.as_bytes();
    while i < s.len() {
        let rest = &s[i..];
        if rest.starts_with("[[") {
            link_depth += 1;
        } else if rest.starts_with("]]") {
            link_depth -= 1;
        } else if rest.starts_with("{{") {
            tmpl_depth += 1;
        } else if rest.starts_with("}}") {
            tmpl_depth -= 1;
        }
        if link_depth <= 0 && tmpl_depth <= 0 {
            if let Some(sep) = seps.iter().find(|sep| rest.starts_with(**sep)) {
                out.push(std::mem::take(&mut cur));
                i += sep.len();
                continue;
            }
        }
        let ch_len = utf8_len(bytes[i]);
        cur.push_str(&s[i..i + ch_len]);
        i += ch_len;
    }
    out.push(cur);
    out
}

fn utf8_len(first: u8) -> usize {
    match first {
        0x00..=0x7F => 1,
        0xC0..=0xDF => 2,
        0xE0..=0xEF => 3,
        _ => 4,
    }
}

/// `style="x" | content` keeps only the content.
fn strip_cell_attributes(cell: &str) -> String {
    let parts = split_cells(cell, &["|"]);
    if parts.len() >= 2 {
        parts[1..].join("|").trim().to_string()
    } else {
        cell.trim().to_string()
    }
}

/// Drops templates, refs, html tags and bold/italic quotes, then splits the
/// remainder into plain text and internal links.
fn parse_inline(s: &str) -> Vec<Segment> {
    let cleaned = strip_noise(s);
    let mut segments = Vec::new();
    let mut rest = cleaned.as_str();
    while let Some(open) = rest.find("[[") {
        let Some(close_rel) = rest[open + 2..].find("]]") else {
            break;
        };
        let inner = &rest[open + 2..open + 2 + close_rel];
        push_text(&mut segments, &rest[..open]);
        let (target, label) = match inner.split_once('|') {
            Some((t, l)) => (t, l),
            None => (inner, inner),
        };
        let target = normalize_target(target);
        let is_namespaced = target.contains(':') && !target.starts_with(':');
        if is_namespaced {
            // files, categories, interwiki
        } else {
            let label = collapse_whitespace(label);
            let target = target.trim_start_matches(':').to_string();
            if !label.is_empty() && !target.is_empty() {
                segments.push(Segment::Link { target, label });
            }
        }
        rest = &rest[open + 2 + close_rel + 2..];
    }
    push_text(&mut segments, rest);
    segments
}

fn push_text(segments: &mut Vec<Segment>, s: &str) {
    if !s.is_empty() {
        segments.push(Segment::Text(s.to_string()));
    }
}

fn normalize_target(t: &str) -> String {
    let t = t.split('#').next().unwrap_or("");
    collapse_whitespace(&t.replace('_', " "))
}

fn strip_noise(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut tmpl_depth = 0usize;
    let mut rest = s;
    while !rest.is_empty() {
        if rest.starts_with("{{") {
            tmpl_depth += 1;
            rest = &rest[2..];
        } else if rest.starts_with("}}") && tmpl_depth > 0 {
            tmpl_depth -= 1;
            rest = &rest[2..];
        } else if tmpl_depth > 0 {
            let n = utf8_len(rest.as_bytes()[0]);
            rest = &rest[n..];
        } else if rest.starts_with("<ref") {
            if let Some(end) = rest.find("/>").filter(|&e| !rest[..e].contains('>')) {
                rest = &rest[end + 2..];
            } else if let Some(end) = rest.find("</ref>") {
                rest = &rest[end + 6..];
            } else {
                rest = "";
            }
        } else if rest.starts_with('<') && rest.find('>').is_some() {
            let end = rest.find('>').unwrap();
            rest = &rest[end + 1..];
            out.push(' ');
        } else if rest.starts_with("''") {
            rest = rest.trim_start_matches('\'');
        } else if rest.starts_with("[[") {
            out.push_str("[[");
            rest = &rest[2..];
        } else if rest.starts_with('[') {
            // external link: [url label]
            match rest.find(']') {
                Some(end) => {
                    let inner = &rest[1..end];
                    if let Some((_, label)) = inner.split_once(' ') {
                        out.push_str(label);
                    }
                    rest = &rest[end + 1..];
                }
                None => {
                    out.push('[');
                    rest = &rest[1..];
                }
            }
        } else {
            let n = utf8_len(rest.as_bytes()[0]);
            out.push_str(&rest[..n]);
            rest = &rest[n..];
        }
    }
    out
}

fn plain_text(segments: &[Segment]) -> String {
    segments
        .iter()
        .map(|s| match s {
            Segment::Text(t) => t.as_str(),
            Segment::Link { label, .. } => label.as_str(),
        })
        .collect::<Vec<_>>()
        .join("")
}

const DELIMITERS: &[char] = &['(', ')', ',', ';', ':', '"', '–', '—', '/', '[', ']', '|', '•', '·'];

/// Splits unlinked text into candidate spans at punctuation and ` - `.
fn text_chunks(text: &str) -> Vec<String> {
    text.split(" - ")
        .flat_map(|part| part.split(DELIMITERS))
        .map(collapse_whitespace)
        .filter(|c| c.chars().any(char::is_alphanumeric))
        .collect()
}

fn segments_to_mentions(segments: &[Segment], known: &BTreeSet<String>, column: Option<usize>) -> Vec<Mention> {
    let mut out = Vec::new();
    for seg in segments {
        match seg {
            Segment::Link { target, label } => {
                let kind = if known.contains(target) {
                    LinkKind::Blue
                } else {
                    LinkKind::Red
                };
                out.push(Mention {
                    column,
                    ..Mention::linked(label.clone(), target.clone(), kind)
                });
            }
            Segment::Text(t) => {
                out.extend(text_chunks(t).into_iter().map(|c| Mention {
                    column,
                    ..Mention::plain(c)
                }));
            }
        }
    }
    out
}

fn is_word_char(c: Option<char>) -> bool {
    c.is_some_and(char::is_alphanumeric)
}

fn at_boundary(text: &str, start: usize, end: usize, surface: &str) -> bool {
    let first = surface.chars().next();
    let last = surface.chars().next_back();
    let before = text[..start].chars().next_back();
    let after = text[end..].chars().next();
    (!is_word_char(first) || !is_word_char(before)) && (!is_word_char(last) || !is_word_char(after))
}

/// Links every unlinked occurrence of a surface that is linked elsewhere in
/// the page's listings. Longest surface wins; equal lengths go to the
/// earliest link on the page. Existing links are never touched.
pub fn expand_links(page: &Page) -> Page {
    let mut dictionary: Vec<(String, String)> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for l in &page.listings {
        for m in l.mentions() {
            if matches!(m.link_kind, LinkKind::Blue | LinkKind::Red) {
                if let Some(e) = &m.entity_ref {
                    if !seen.contains_key(&m.surface) {
                        seen.insert(m.surface.clone(), dictionary.len());
                        dictionary.push((m.surface.clone(), e.clone()));
                    }
                }
            }
        }
    }
    let mut out = page.clone();
    if dictionary.is_empty() {
        return out;
    }
    for listing in &mut out.listings {
        for row in &mut listing.rows {
            let mut expanded = Vec::with_capacity(row.mentions.len());
            for m in row.mentions.drain(..) {
                let expandable = m.entity_ref.is_none() && matches!(m.link_kind, LinkKind::None | LinkKind::Tagged);
                if expandable {
                    expanded.extend(expand_span(&m, &dictionary));
                } else {
                    expanded.push(m);
                }
            }
            row.mentions = expanded;
        }
    }
    out
}

fn expand_span(m: &Mention, dictionary: &[(String, String)]) -> Vec<Mention> {
    let text = m.surface.as_str();
    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for (order, (surface, _)) in dictionary.iter().enumerate() {
        for (start, hit) in text.match_indices(surface.as_str()) {
            let end = start + hit.len();
            if at_boundary(text, start, end, surface) {
                candidates.push((start, end, order));
            }
        }
    }
    if candidates.is_empty() {
        return vec![m.clone()];
    }
    candidates.sort_by(|a, b| (b.1 - b.0).cmp(&(a.1 - a.0)).then(a.2.cmp(&b.2)).then(a.0.cmp(&b.0)));
    let mut accepted: Vec<(usize, usize, usize)> = Vec::new();
    for c in candidates {
        if accepted.iter().all(|a| c.1 <= a.0 || c.0 >= a.1) {
            accepted.push(c);
        }
    }
    accepted.sort_by_key(|a| a.0);

    let mut out = Vec::new();
    let mut cursor = 0;
    let leftover = |s: &str, out: &mut Vec<Mention>| {
        let s = collapse_whitespace(s);
        if s.chars().any(char::is_alphanumeric) {
            out.push(Mention {
                surface: s,
                ..m.clone()
            });
        }
    };
    for (start, end, order) in accepted {
        leftover(&text[cursor..start], &mut out);
        out.push(Mention {
            surface: text[start..end].to_string(),
            entity_ref: Some(dictionary[order].1.clone()),
            link_kind: LinkKind::Expanded,
            ..m.clone()
        });
        cursor = end;
    }
    leftover(&text[cursor..], &mut out);
    out
}
