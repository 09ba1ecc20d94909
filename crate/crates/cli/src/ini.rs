//! Flat sectioned `key = value` text.

use std::fmt::Write as _;

use crate::ConfigError;

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IniDoc {
    pub sections: Vec<Section>,
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(k) => &line[..k],
        None => line,
    }
}

impl IniDoc {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = IniDoc::default();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let s = strip_comment(raw).trim();
            if s.is_empty() {
                continue;
            }
            if let Some(rest) = s.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| ConfigError::at(line, "", format!("malformed section header `{s}`")))?;
                if doc.sections.iter().any(|x| x.name == name) {
                    return Err(ConfigError::at(line, name, "duplicate section"));
                }
                doc.sections.push(Section { name: name.to_string(), line, entries: vec![] });
                continue;
            }
            let (key, value) = s
                .split_once('=')
                .ok_or_else(|| ConfigError::at(line, "", format!("expected `key = value`, got `{s}`")))?;
            let key = key.trim();
            let sec = doc
                .sections
                .last_mut()
                .ok_or_else(|| ConfigError::at(line, key, "key outside any section"))?;
            if key.is_empty() {
                return Err(ConfigError::at(line, &sec.name, "empty key"));
            }
            if sec.entries.iter().any(|e| e.key == key) {
                return Err(ConfigError::at(line, format!("{}.{key}", sec.name), "duplicate key"));
            }
            sec.entries.push(Entry { key: key.to_string(), value: value.trim().to_string(), line });
        }
        Ok(doc)
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn push(&mut self, name: &str, entries: Vec<(&str, String)>) {
        self.sections.push(Section {
            name: name.to_string(),
            line: 0,
            entries: entries.into_iter().map(|(k, v)| Entry { key: k.to_string(), value: v, line: 0 }).collect(),
        });
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{}]", s.name);
            for e in &s.entries {
                let _ = writeln!(out, "{} = {}", e.key, e.value);
            }
        }
        out
    }
}

/// Comma-separated items, ignoring commas nested in parentheses.
pub fn split_list(s: &str) -> Vec<String> {
    let mut out = vec![];
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

/// Reads the keys of one section, remembering which were used so leftovers
/// can be reported as unknown.
pub struct Reader<'a> {
    section: &'a Section,
    used: Vec<bool>,
}

impl<'a> Reader<'a> {
    pub fn new(section: &'a Section) -> Self {
        Reader { section, used: vec![false; section.entries.len()] }
    }

    pub fn field(&self, key: &str) -> String {
        format!("{}.{key}", self.section.name)
    }

    pub fn line(&self) -> usize {
        self.section.line
    }

    pub fn get(&mut self, key: &str) -> Option<(&'a str, usize)> {
        let k = self.section.entries.iter().position(|e| e.key == key)?;
        self.used[k] = true;
        let e = &self.section.entries[k];
        Some((e.value.as_str(), e.line))
    }

    pub fn require(&mut self, key: &str) -> Result<(&'a str, usize), ConfigError> {
        let line = self.section.line;
        let field = self.field(key);
        self.get(key).ok_or_else(|| ConfigError::at(line, field, "missing key"))
    }

    /// Parses an optional key with `f`, attaching the key's line to errors.
    pub fn parse<T>(&mut self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<Option<T>, ConfigError> {
        let field = self.field(key);
        match self.get(key) {
            None => Ok(None),
            Some((v, line)) => f(v).map(Some).map_err(|m| ConfigError::at(line, field, m)),
        }
    }

    pub fn parse_req<T>(&mut self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        let line = self.section.line;
        let field = self.field(key);
        self.parse(key, f)?.ok_or_else(|| ConfigError::at(line, field, "missing key"))
    }

    pub fn finish(self) -> Result<(), ConfigError> {
        match self.used.iter().position(|u| !u) {
            None => Ok(()),
            Some(k) => {
                let e = &self.section.entries[k];
                Err(ConfigError::at(e.line, format!("{}.{}", self.section.name, e.key), "unknown key"))
            }
        }
    }
}
