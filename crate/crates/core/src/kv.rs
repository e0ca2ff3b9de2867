//! Minimal INI-style key-value reader shared by the material table and the
//! run configuration files.
//!
//! ```text
//! # comment
//! [section]
//! key = value   # trailing comment
//! ```

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub name: String,
    pub line: usize,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, Default)]
pub struct Document {
    pub path: String,
    pub sections: Vec<Section>,
}

impl Document {
    pub fn parse(path: &str, text: &str) -> Result<Self> {
        let mut sections: Vec<Section> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                    path: path.to_string(),
                    line,
                    key: content.to_string(),
                    message: "unterminated section header".into(),
                })?;
                sections.push(Section {
                    name: name.trim().to_string(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_string(),
                line,
                key: content.to_string(),
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            let section = sections.last_mut().ok_or_else(|| Error::Parse {
                path: path.to_string(),
                line,
                key: key.clone(),
                message: "key outside of any [section]".into(),
            })?;
            if section.entries.iter().any(|e| e.key == key) {
                return Err(Error::Parse {
                    path: path.to_string(),
                    line,
                    key,
                    message: "duplicate key".into(),
                });
            }
            section.entries.push(Entry {
                key,
                value: value.trim().to_string(),
                line,
            });
        }
        Ok(Document {
            path: path.to_string(),
            sections,
        })
    }

    pub fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn error(&self, line: usize, key: &str, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            key: key.to_string(),
            message: message.into(),
        }
    }
}

/// Typed access to one section, tracking which keys were consumed so that
/// unknown keys can be rejected afterwards.
pub struct Reader<'a> {
    doc: &'a Document,
    section: &'a Section,
    used: Vec<bool>,
}

impl<'a> Reader<'a> {
    pub fn new(doc: &'a Document, section: &'a Section) -> Self {
        Reader {
            doc,
            section,
            used: vec![false; section.entries.len()],
        }
    }

    fn find(&mut self, key: &str) -> Option<&'a Entry> {
        let idx = self.section.entries.iter().position(|e| e.key == key)?;
        self.used[idx] = true;
        Some(&self.section.entries[idx])
    }

    pub fn str_opt(&mut self, key: &str) -> Option<String> {
        self.find(key).map(|e| e.value.clone())
    }

    pub fn f64_opt(&mut self, key: &str) -> Result<Option<f64>> {
        match self.find(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<f64>()
                .map(Some)
                .map_err(|_| self.doc.error(e.line, key, format!("not a number: `{}`", e.value))),
        }
    }

    pub fn f64_req(&mut self, key: &str) -> Result<f64> {
        self.f64_opt(key)?.ok_or_else(|| {
            self.doc.error(
                self.section.line,
                key,
                format!("missing required key in [{}]", self.section.name),
            )
        })
    }

    pub fn f64_list_opt(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.find(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| self.doc.error(e.line, key, format!("not a number list: `{}`", e.value))),
        }
    }

    pub fn u64_opt(&mut self, key: &str) -> Result<Option<u64>> {
        match self.find(key) {
            None => Ok(None),
            Some(e) => {
                // accept 1e6 style as long as it is integral
                let parsed = e.value.parse::<u64>().ok().or_else(|| {
                    e.value
                        .parse::<f64>()
                        .ok()
                        .filter(|v| *v >= 0.0 && v.fract() == 0.0 && *v < 1.8e19)
                        .map(|v| v as u64)
                });
                parsed
                    .map(Some)
                    .ok_or_else(|| self.doc.error(e.line, key, format!("not a non-negative integer: `{}`", e.value)))
            }
        }
    }

    pub fn bool_opt(&mut self, key: &str) -> Result<Option<bool>> {
        match self.find(key) {
            None => Ok(None),
            Some(e) => match e.value.as_str() {
                "true" | "yes" | "on" | "1" => Ok(Some(true)),
                "false" | "no" | "off" | "0" => Ok(Some(false)),
                other => Err(self.doc.error(e.line, key, format!("not a boolean: `{other}`"))),
            },
        }
    }

    /// Line of a key, for error reporting after validation.
    pub fn line_of(&self, key: &str) -> usize {
        self.section
            .entries
            .iter()
            .find(|e| e.key == key)
            .map(|e| e.line)
            .unwrap_or(self.section.line)
    }

    pub fn invalid(&self, key: &str, message: impl Into<String>) -> Error {
        self.doc.error(self.line_of(key), key, message)
    }

    /// Fails on the first key that no accessor asked for.
    pub fn finish(self) -> Result<()> {
        for (entry, used) in self.section.entries.iter().zip(&self.used) {
            if !used {
                return Err(self.doc.error(
                    entry.line,
                    &entry.key,
                    format!("unknown key in [{}]", self.section.name),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_and_comments() {
        let doc = Document::parse("t.cfg", "# top\n[a]\nx = 1 # c\ny=2\n\n[b]\nz = hello\n").unwrap();
        assert_eq!(doc.sections.len(), 2);
        let a = doc.section("a").unwrap();
        assert_eq!(a.entries[0].key, "x");
        assert_eq!(a.entries[0].line, 3);
        assert_eq!(doc.section("b").unwrap().entries[0].value, "hello");
    }

    #[test]
    fn rejects_orphan_duplicate_and_unknown_keys() {
        assert!(Document::parse("t", "x = 1\n").is_err());
        assert!(Document::parse("t", "[a]\nx=1\nx=2\n").is_err());
        let doc = Document::parse("t", "[a]\nx = 1\nbogus = 3\n").unwrap();
        let mut r = Reader::new(&doc, doc.section("a").unwrap());
        assert_eq!(r.f64_req("x").unwrap(), 1.0);
        match r.finish() {
            Err(Error::Parse { key, line, .. }) => {
                assert_eq!(key, "bogus");
                assert_eq!(line, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn integer_accepts_scientific() {
        let doc = Document::parse("t", "[a]\nn = 1e6\nm = 1.5\n").unwrap();
        let mut r = Reader::new(&doc, doc.section("a").unwrap());
        assert_eq!(r.u64_opt("n").unwrap(), Some(1_000_000));
        assert!(r.u64_opt("m").is_err());
    }
}
