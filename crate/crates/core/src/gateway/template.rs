//! Prompt templates.
//!
//! A template file is split into sections by `[name]` header lines:
//!
//! ```text
//! [perspective]   role-setting preamble
//! [definitions]   one `- ` item per category definition
//! [task]          task specification
//! [constraints]   one `- ` item each; `- @in_progress ...` limits an item to a stage
//! [example]       `input:` / `output:` pair, repeatable
//! [related]       context block with `{{slot}}` placeholders
//! ```
//!
//! Lines starting with `;;` are comments. Placeholders may appear in any
//! section and are filled at render time.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use thiserror::Error;

use super::BotId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemplateError {
    #[error("missing slot `{0}`")]
    MissingSlot(String),
    #[error("{file}:{line}: {reason}")]
    Parse {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("cannot read prompt file {file}: {reason}")]
    Io { file: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub text: String,
    /// Stage scope (`beginning`, `in_progress`, `ending`); `None` applies always.
    pub scope: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewShot {
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PromptTemplate {
    pub perspective: String,
    pub definitions: Vec<String>,
    pub task_spec: String,
    pub constraints: Vec<Constraint>,
    pub few_shots: Vec<FewShot>,
    pub related: String,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Perspective,
    Definitions,
    Task,
    Constraints,
    Example,
    Related,
}

impl PromptTemplate {
    pub fn parse(file: &str, text: &str) -> Result<Self, TemplateError> {
        let mut t = PromptTemplate::default();
        let mut section: Option<Section> = None;
        let mut example: Option<(String, String, bool)> = None;
        let err = |line: usize, reason: &str| TemplateError::Parse {
            file: file.to_string(),
            line,
            reason: reason.to_string(),
        };

        fn push_line(buf: &mut String, line: &str) {
            if !buf.is_empty() {
                buf.push('\n');
            }
            buf.push_str(line);
        }

        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.starts_with(";;") {
                continue;
            }
            let trimmed = line.trim();
            let is_header = trimmed.len() > 2
                && trimmed.starts_with('[')
                && trimmed.ends_with(']')
                && trimmed[1..trimmed.len() - 1].chars().all(|c| c.is_ascii_lowercase());
            if is_header {
                if let Some((input, output, _)) = example.take() {
                    t.few_shots.push(FewShot {
                        input: input.trim().to_string(),
                        output: output.trim().to_string(),
                    });
                }
                section = Some(match &trimmed[1..trimmed.len() - 1] {
                    "perspective" => Section::Perspective,
                    "definitions" => Section::Definitions,
                    "task" => Section::Task,
                    "constraints" => Section::Constraints,
                    "example" => {
                        example = Some((String::new(), String::new(), false));
                        Section::Example
                    }
                    "related" => Section::Related,
                    other => return Err(err(lineno, &format!("unknown section `{other}`"))),
                });
                continue;
            }
            let Some(current) = section else {
                if trimmed.is_empty() {
                    continue;
                }
                return Err(err(lineno, "text before the first section header"));
            };
            match current {
                Section::Perspective => push_line(&mut t.perspective, line),
                Section::Task => push_line(&mut t.task_spec, line),
                Section::Related => push_line(&mut t.related, line),
                Section::Definitions | Section::Constraints => {
                    if trimmed.is_empty() {
                        continue;
                    }
                    let Some(item) = trimmed.strip_prefix("- ") else {
                        return Err(err(lineno, "list items must start with `- `"));
                    };
                    if current == Section::Definitions {
                        t.definitions.push(item.to_string());
                    } else if let Some(scoped) = item.strip_prefix('@') {
                        let (scope, rest) = scoped
                            .split_once(' ')
                            .ok_or_else(|| err(lineno, "scoped constraint without text"))?;
                        t.constraints.push(Constraint {
                            text: rest.trim().to_string(),
                            scope: Some(scope.to_string()),
                        });
                    } else {
                        t.constraints.push(Constraint {
                            text: item.to_string(),
                            scope: None,
                        });
                    }
                }
                Section::Example => {
                    let (input, output, in_output) = example.as_mut().expect("example section is open");
                    if let Some(rest) = trimmed.strip_prefix("input:") {
                        push_line(input, rest.trim());
                    } else if let Some(rest) = trimmed.strip_prefix("output:") {
                        *in_output = true;
                        push_line(output, rest.trim());
                    } else if *in_output {
                        push_line(output, line);
                    } else {
                        push_line(input, line);
                    }
                }
            }
        }
        if let Some((input, output, _)) = example.take() {
            t.few_shots.push(FewShot {
                input: input.trim().to_string(),
                output: output.trim().to_string(),
            });
        }
        t.perspective = t.perspective.trim().to_string();
        t.task_spec = t.task_spec.trim().to_string();
        t.related = t.related.trim().to_string();
        if t.few_shots.iter().any(|f| f.input.is_empty() || f.output.is_empty()) {
            return Err(err(0, "every example needs both input and output"));
        }
        Ok(t)
    }

    /// Keeps unscoped constraints and those scoped to `scope`.
    pub fn scoped(&self, scope: &str) -> PromptTemplate {
        let mut t = self.clone();
        t.constraints
            .retain(|c| c.scope.as_deref().is_none_or(|s| s == scope));
        t
    }

    /// Every `{{slot}}` referenced anywhere in the template.
    pub fn slots(&self) -> BTreeSet<String> {
        placeholders(&self.body()).into_iter().map(|(_, _, name)| name).collect()
    }

    /// Unfilled prompt text: perspective, definitions, task, constraints,
    /// examples and related information, in that order.
    pub fn body(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        if !self.perspective.is_empty() {
            parts.push(self.perspective.clone());
        }
        if !self.definitions.is_empty() {
            parts.push(format!("Definitions:\n{}", bullet(self.definitions.iter())));
        }
        if !self.task_spec.is_empty() {
            parts.push(self.task_spec.clone());
        }
        if !self.constraints.is_empty() {
            parts.push(format!(
                "Constraints:\n{}",
                bullet(self.constraints.iter().map(|c| &c.text))
            ));
        }
        if !self.few_shots.is_empty() {
            let shots: Vec<String> = self
                .few_shots
                .iter()
                .map(|f| format!("Input: {}\nOutput: {}", f.input, f.output))
                .collect();
            parts.push(format!("Examples:\n{}", shots.join("\n\n")));
        }
        if !self.related.is_empty() {
            parts.push(self.related.clone());
        }
        parts.join("\n\n")
    }

    /// Fills every placeholder. Slot values are inserted verbatim and are not
    /// themselves scanned for placeholders.
    pub fn render(&self, slots: &BTreeMap<String, String>) -> Result<String, TemplateError> {
        let body = self.body();
        let mut out = String::with_capacity(body.len());
        let mut last = 0;
        for (start, end, name) in placeholders(&body) {
            let value = slots
                .get(&name)
                .ok_or_else(|| TemplateError::MissingSlot(name.clone()))?;
            out.push_str(&body[last..start]);
            out.push_str(value);
            last = end;
        }
        out.push_str(&body[last..]);
        Ok(out)
    }
}

fn bullet<'a>(items: impl Iterator<Item = &'a String>) -> String {
    items.map(|s| format!("- {s}")).collect::<Vec<_>>().join("\n")
}

/// `(start, end, name)` of each well-formed `{{name}}` placeholder.
fn placeholders(text: &str) -> Vec<(usize, usize, String)> {
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(rel) = text[from..].find("{{") {
        let start = from + rel;
        let Some(close) = text[start + 2..].find("}}") else {
            break;
        };
        let name = text[start + 2..start + 2 + close].trim();
        let valid = !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if valid {
            let end = start + 2 + close + 2;
            out.push((start, end, name.to_string()));
            from = end;
        } else {
            from = start + 2;
        }
    }
    out
}

/// Templates for all five bots.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptSet {
    templates: BTreeMap<BotId, PromptTemplate>,
}

const BUILTIN: [(BotId, &str); 5] = [
    (BotId::Classifier, include_str!("../../../../prompts/classifier.txt")),
    (BotId::Compiler, include_str!("../../../../prompts/compiler.txt")),
    (BotId::Explorer, include_str!("../../../../prompts/explorer.txt")),
    (BotId::Navigator, include_str!("../../../../prompts/navigator.txt")),
    (BotId::Identifier, include_str!("../../../../prompts/identifier.txt")),
];

impl PromptSet {
    /// The prompts shipped under `prompts/`, compiled in.
    pub fn builtin() -> Self {
        let templates = BUILTIN
            .iter()
            .map(|(bot, text)| {
                let t = PromptTemplate::parse(&format!("{}.txt", bot.name()), text)
                    .expect("built-in prompts parse");
                (*bot, t)
            })
            .collect();
        PromptSet { templates }
    }

    /// Loads `<bot>.txt` for every bot from `dir`.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self, TemplateError> {
        let dir = dir.as_ref();
        let mut templates = BTreeMap::new();
        for bot in BotId::ALL {
            let path = dir.join(format!("{}.txt", bot.name()));
            let file = path.display().to_string();
            let text = std::fs::read_to_string(&path).map_err(|e| TemplateError::Io {
                file: file.clone(),
                reason: e.to_string(),
            })?;
            templates.insert(bot, PromptTemplate::parse(&file, &text)?);
        }
        Ok(PromptSet { templates })
    }

    pub fn get(&self, bot: BotId) -> &PromptTemplate {
        &self.templates[&bot]
    }
}
