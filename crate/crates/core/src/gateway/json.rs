//! Tolerant JSON extraction for model output.
//!
//! Pipeline: try the raw text, strip code fences, try again, locate the first balanced
//! `{...}` (falling back to `[...]`), parse; if that fails run one repair pass
//! (drop prose after the closing bracket, single to double quotes outside
//! strings, drop trailing commas) and parse again.

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("could not recover JSON from model output")]
pub struct RepairFailed {
    pub raw: String,
}

pub fn extract_json(raw: &str) -> Result<Value, RepairFailed> {
    if let Ok(v) = serde_json::from_str::<Value>(raw.trim()) {
        return Ok(v);
    }
    let body = strip_fences(raw);
    let trimmed = body.trim();
    if let Ok(v) = serde_json::from_str::<Value>(trimmed) {
        return Ok(v);
    }

    let candidate = locate_balanced(trimmed, '{', '}')
        .or_else(|| locate_balanced(trimmed, '[', ']'))
        .or_else(|| trimmed.find(['{', '[']).map(|i| &trimmed[i..]));
    let Some(candidate) = candidate else {
        return Err(RepairFailed { raw: raw.to_string() });
    };
    if let Ok(v) = serde_json::from_str::<Value>(candidate) {
        return Ok(v);
    }

    let repaired = remove_trailing_commas(&single_to_double_quotes(cut_after_last_close(candidate)));
    serde_json::from_str::<Value>(&repaired).map_err(|_| RepairFailed { raw: raw.to_string() })
}

/// Returns the contents of the first fenced block, or the input unchanged.
fn strip_fences(text: &str) -> &str {
    let Some(start) = text.find("```") else {
        return text;
    };
    let after = &text[start + 3..];
    // skip an info string such as `json`
    let content_start = match after.find('\n') {
        Some(nl) if after[..nl].trim().chars().all(|c| c.is_ascii_alphanumeric()) => nl + 1,
        _ => 0,
    };
    let content = &after[content_start..];
    match content.find("```") {
        Some(end) => &content[..end],
        None => content,
    }
}

/// First balanced `open ... close` span, skipping brackets inside strings.
/// Both double- and single-quoted strings are honoured.
fn locate_balanced(text: &str, open: char, close: char) -> Option<&str> {
    let start = text.find(open)?;
    let mut depth = 0usize;
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for (i, c) in text[start..].char_indices() {
        if let Some(q) = quote {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == q {
                quote = None;
            }
            continue;
        }
        match c {
            '"' => quote = Some('"'),
            '\'' if is_single_quote_open(&text[..start + i]) => quote = Some('\''),
            c if c == open => depth += 1,
            c if c == close => {
                depth -= 1;
                if depth == 0 {
                    return Some(&text[start..start + i + c.len_utf8()]);
                }
            }
            _ => {}
        }
    }
    None
}

/// A `'` opens a string only where a JSON value or key may start.
fn is_single_quote_open(before: &str) -> bool {
    matches!(before.trim_end().chars().last(), Some('[' | '{' | ',' | ':'))
}

fn cut_after_last_close(text: &str) -> &str {
    match text.rfind(['}', ']']) {
        Some(i) => &text[..=i],
        None => text,
    }
}

fn single_to_double_quotes(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut in_double = false;
    let mut in_single = false;
    let mut escaped = false;
    for (i, c) in text.char_indices() {
        if in_double {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_double = false;
            }
            continue;
        }
        if in_single {
            if escaped {
                escaped = false;
                if c == '\'' {
                    // `\'` is not a JSON escape
                    out.pop();
                }
                out.push(c);
            } else if c == '\\' {
                escaped = true;
                out.push(c);
            } else if c == '\'' && closes_single(&text[i + 1..]) {
                in_single = false;
                out.push('"');
            } else if c == '"' {
                out.push_str("\\\"");
            } else {
                out.push(c);
            }
            continue;
        }
        match c {
            '"' => {
                in_double = true;
                out.push(c);
            }
            '\'' => {
                in_single = true;
                out.push('"');
            }
            _ => out.push(c),
        }
    }
    out
}

/// An apostrophe inside a single-quoted string closes it only when followed
/// by structure (`,` `:` `]` `}`) or the end of input.
fn closes_single(rest: &str) -> bool {
    matches!(rest.trim_start().chars().next(), None | Some(',' | ':' | ']' | '}'))
}

fn remove_trailing_commas(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut in_string = false;
    let mut escaped = false;
    for (i, &c) in chars.iter().enumerate() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        if c == '"' {
            in_string = true;
        }
        if c == ',' {
            let next = chars[i + 1..].iter().find(|c| !c.is_whitespace());
            if matches!(next, Some(']' | '}')) {
                continue;
            }
        }
        out.push(c);
    }
    out
}
