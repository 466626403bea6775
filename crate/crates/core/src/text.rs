//! Small text helpers shared by name matching, prompt slots and feedback.

/// Case-folds, turns punctuation into spaces and collapses whitespace.
pub fn normalize_name(s: &str) -> String {
    let folded: String = s
        .chars()
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Byte offset of the first whole-word occurrence of `needle` in `haystack`,
/// both compared in normalised form. Returns the offset in the normalised
/// haystack.
pub fn find_phrase(normalized_haystack: &str, normalized_needle: &str) -> Option<usize> {
    if normalized_needle.is_empty() {
        return None;
    }
    let hay = normalized_haystack.as_bytes();
    let mut from = 0;
    while let Some(rel) = normalized_haystack[from..].find(normalized_needle) {
        let start = from + rel;
        let end = start + normalized_needle.len();
        let left_ok = start == 0 || hay[start - 1] == b' ';
        let right_ok = end == hay.len() || hay[end] == b' ';
        if left_ok && right_ok {
            return Some(start);
        }
        from = start + normalized_haystack[start..].chars().next().map_or(1, char::len_utf8);
    }
    None
}

/// Formats a coordinate with at most two decimals and at least one.
pub fn fmt_coord(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    let s = format!("{v:.2}");
    let trimmed = s.trim_end_matches('0');
    if trimmed.ends_with('.') {
        format!("{trimmed}0")
    } else {
        trimmed.to_string()
    }
}

pub fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| fmt_coord(*v)).collect();
    format!("({})", parts.join(", "))
}

/// Splits prose into sentences on `.`, `!` and `?` followed by whitespace.
pub fn sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    for (k, &(i, c)) in chars.iter().enumerate() {
        if matches!(c, '.' | '!' | '?') {
            let next_is_space = chars.get(k + 1).is_none_or(|&(_, n)| n.is_whitespace());
            if next_is_space {
                let end = i + c.len_utf8();
                let s = text[start..end].trim();
                if !s.is_empty() {
                    out.push(s);
                }
                start = end;
            }
        }
    }
    let rest = text[start..].trim();
    if !rest.is_empty() {
        out.push(rest);
    }
    out
}
