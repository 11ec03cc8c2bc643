//! Small text helpers shared by the extractor, the tagger and id minting.

/// Collapses runs of whitespace into single spaces and trims the ends.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Lowercased, single-spaced, trimmed form used for section titles and
/// minted entity ids.
pub fn normalize_title(s: &str) -> String {
    collapse_whitespace(&s.to_lowercase())
}

/// Escapes characters that would break the tab/`;`/`=` separated rule format.
pub fn escape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '%' => out.push_str("%25"),
            ';' => out.push_str("%3B"),
            '=' => out.push_str("%3D"),
            '\t' => out.push_str("%09"),
            '\n' => out.push_str("%0A"),
            '\r' => out.push_str("%0D"),
            _ => out.push(c),
        }
    }
    out
}

pub fn unescape_field(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(idx) = rest.find('%') {
        out.push_str(&rest[..idx]);
        let code = rest.get(idx + 1..idx + 3);
        let decoded = code.and_then(|c| u8::from_str_radix(c, 16).ok());
        match decoded {
            Some(b) if b.is_ascii() => {
                out.push(b as char);
                rest = &rest[idx + 3..];
            }
            _ => {
                out.push('%');
                rest = &rest[idx + 1..];
            }
        }
    }
    out.push_str(rest);
    out
}
