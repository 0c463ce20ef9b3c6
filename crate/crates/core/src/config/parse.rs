use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// A scalar configuration value.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    String(String),
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl Scalar {
    pub fn type_name(&self) -> &'static str {
        match self {
            Scalar::String(_) => "string",
            Scalar::Int(_) => "integer",
            Scalar::Float(_) => "float",
            Scalar::Bool(_) => "boolean",
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::String(s) => write!(f, "{s:?}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Float(x) => write!(f, "{x}"),
            Scalar::Bool(b) => write!(f, "{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Scalar(Scalar),
    Object(BTreeMap<String, Node>),
}

/// Parsed configuration: nested objects of scalars.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConfigTree {
    pub root: BTreeMap<String, Node>,
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{line}:{col}: `{path}` is a value and cannot also be an object")]
    PathConflict {
        path: String,
        line: usize,
        col: usize,
    },
}

impl ConfigTree {
    pub fn new(source: impl Into<String>) -> Self {
        Self {
            root: BTreeMap::new(),
            source: source.into(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_empty()
    }

    pub fn get(&self, path: &str) -> Option<&Node> {
        let mut segments = path.split('.');
        let mut node = self.root.get(segments.next()?)?;
        for seg in segments {
            match node {
                Node::Object(map) => node = map.get(seg)?,
                Node::Scalar(_) => return None,
            }
        }
        Some(node)
    }

    pub fn get_scalar(&self, path: &str) -> Option<&Scalar> {
        match self.get(path)? {
            Node::Scalar(s) => Some(s),
            Node::Object(_) => None,
        }
    }

    /// Assigns a scalar, replacing whatever was at `path`. Intermediate
    /// scalars are replaced by objects.
    pub fn set(&mut self, path: &[String], value: Scalar) {
        let (last, parents) = path.split_last().expect("non-empty path");
        let mut map = &mut self.root;
        for seg in parents {
            let entry = map
                .entry(seg.clone())
                .or_insert_with(|| Node::Object(BTreeMap::new()));
            if let Node::Scalar(_) = entry {
                *entry = Node::Object(BTreeMap::new());
            }
            let Node::Object(inner) = entry else {
                unreachable!()
            };
            map = inner;
        }
        map.insert(last.clone(), Node::Scalar(value));
    }

    /// Every (dotted path, scalar) pair in key order.
    pub fn leaves(&self) -> Vec<(String, &Scalar)> {
        fn walk<'a>(
            prefix: &str,
            map: &'a BTreeMap<String, Node>,
            out: &mut Vec<(String, &'a Scalar)>,
        ) {
            for (k, v) in map {
                let path = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                match v {
                    Node::Scalar(s) => out.push((path, s)),
                    Node::Object(m) => walk(&path, m, out),
                }
            }
        }
        let mut out = Vec::new();
        walk("", &self.root, &mut out);
        out
    }

    /// Path-wise override: every leaf of `over` replaces the one in `self`.
    pub fn merged_with(&self, over: &ConfigTree) -> ConfigTree {
        let mut out = self.clone();
        for (path, value) in over.leaves() {
            let segs: Vec<String> = path.split('.').map(str::to_owned).collect();
            out.set(&segs, value.clone());
        }
        out.source = over.source.clone();
        out
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    tree: ConfigTree,
}

/// Parses the supported HOCON subset.
pub fn parse_config(text: &str) -> Result<ConfigTree, ConfigError> {
    parse_config_from(text, "<input>")
}

pub fn parse_config_from(text: &str, source: &str) -> Result<ConfigTree, ConfigError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        tree: ConfigTree::new(source),
    };
    p.skip_trivia();
    if p.peek() == Some('{') {
        p.pos += 1;
        p.object_body(&[], true)?;
    } else {
        p.object_body(&[], false)?;
    }
    p.skip_trivia();
    if p.peek().is_some() {
        return Err(p.error("unexpected content after the root object"));
    }
    Ok(p.tree)
}

fn is_unquoted_char(c: char) -> bool {
    !c.is_whitespace() && !"{}[]=:,#\"'".contains(c)
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.chars.get(self.pos + i) == Some(&c))
    }

    fn line_col(&self, pos: usize) -> (usize, usize) {
        let mut line = 1;
        let mut col = 1;
        for &c in &self.chars[..pos.min(self.chars.len())] {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        }
        (line, col)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> ConfigError {
        let (line, col) = self.line_col(pos);
        ConfigError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> ConfigError {
        self.error_at(self.pos, message)
    }

    fn skip_comment(&mut self) -> bool {
        if self.peek() == Some('#') || self.at("//") {
            while let Some(c) = self.peek() {
                if c == '\n' {
                    break;
                }
                self.pos += 1;
            }
            true
        } else {
            false
        }
    }

    /// Whitespace (including newlines), commas and comments.
    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() || c == ',' => self.pos += 1,
                _ if self.skip_comment() => {}
                _ => break,
            }
        }
    }

    fn skip_inline_space(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r')) {
            self.pos += 1;
        }
    }

    fn object_body(&mut self, prefix: &[String], braced: bool) -> Result<(), ConfigError> {
        let open_pos = self.pos.saturating_sub(1);
        loop {
            self.skip_trivia();
            match self.peek() {
                None if braced => return Err(self.error_at(open_pos, "unterminated `{`")),
                None => return Ok(()),
                Some('}') if braced => {
                    self.pos += 1;
                    return Ok(());
                }
                Some('}') => return Err(self.error("unexpected `}`")),
                Some(_) => self.field(prefix)?,
            }
        }
    }

    fn key(&mut self) -> Result<Vec<String>, ConfigError> {
        let mut segments = Vec::new();
        loop {
            let start = self.pos;
            let seg = if self.peek() == Some('"') {
                self.quoted()?
            } else {
                let mut s = String::new();
                while let Some(c) = self.peek() {
                    if is_unquoted_char(c) && c != '.' && !self.at("//") {
                        s.push(c);
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                s
            };
            if seg.is_empty() || seg.contains('.') {
                return Err(self.error_at(start, "expected a key"));
            }
            segments.push(seg);
            if self.peek() == Some('.') {
                self.pos += 1;
            } else {
                return Ok(segments);
            }
        }
    }

    fn field(&mut self, prefix: &[String]) -> Result<(), ConfigError> {
        let key_pos = self.pos;
        let key = self.key()?;
        let mut path = prefix.to_vec();
        path.extend(key);
        self.skip_inline_space();
        let mut separator = false;
        if matches!(self.peek(), Some('=' | ':')) {
            self.pos += 1;
            separator = true;
            self.skip_inline_space();
        }
        match self.peek() {
            Some('{') => {
                self.pos += 1;
                self.open_object(&path, key_pos)?;
                self.object_body(&path, true)
            }
            Some('[') => Err(self.error("arrays are not supported")),
            _ if !separator => Err(self.error("expected `=`, `:` or `{` after key")),
            _ => {
                let value = self.value()?;
                self.tree.set(&path, value);
                self.end_of_field()
            }
        }
    }

    /// Reopening a scalar path as an object is a conflict.
    fn open_object(&mut self, path: &[String], key_pos: usize) -> Result<(), ConfigError> {
        let mut map = &mut self.tree.root;
        for (i, seg) in path.iter().enumerate() {
            let entry = map
                .entry(seg.clone())
                .or_insert_with(|| Node::Object(BTreeMap::new()));
            match entry {
                Node::Object(inner) => map = inner,
                Node::Scalar(_) => {
                    let (line, col) = self.line_col(key_pos);
                    return Err(ConfigError::PathConflict {
                        path: path[..=i].join("."),
                        line,
                        col,
                    });
                }
            }
        }
        Ok(())
    }

    fn end_of_field(&mut self) -> Result<(), ConfigError> {
        self.skip_inline_space();
        match self.peek() {
            None | Some('\n' | ',' | '}' | '#') => Ok(()),
            _ if self.at("//") => Ok(()),
            _ => Err(self.error("expected end of line after value")),
        }
    }

    fn quoted(&mut self) -> Result<String, ConfigError> {
        let start = self.pos;
        self.pos += 1;
        let mut s = String::new();
        loop {
            match self.peek() {
                None | Some('\n') => return Err(self.error_at(start, "unterminated string")),
                Some('"') => {
                    self.pos += 1;
                    return Ok(s);
                }
                Some('\\') => {
                    let esc_pos = self.pos;
                    self.pos += 1;
                    let c = match self.peek() {
                        Some('n') => '\n',
                        Some('t') => '\t',
                        Some('r') => '\r',
                        Some('b') => '\u{8}',
                        Some('f') => '\u{c}',
                        Some(c @ ('"' | '\\' | '/')) => c,
                        Some('u') => {
                            let hex: String =
                                self.chars.iter().skip(self.pos + 1).take(4).collect();
                            let code = u32::from_str_radix(&hex, 16)
                                .ok()
                                .filter(|_| hex.len() == 4)
                                .and_then(char::from_u32)
                                .ok_or_else(|| self.error_at(esc_pos, "invalid unicode escape"))?;
                            self.pos += 4;
                            code
                        }
                        _ => return Err(self.error_at(esc_pos, "invalid escape sequence")),
                    };
                    s.push(c);
                    self.pos += 1;
                }
                Some(c) => {
                    s.push(c);
                    self.pos += 1;
                }
            }
        }
    }

    fn value(&mut self) -> Result<Scalar, ConfigError> {
        if self.peek() == Some('"') {
            return self.quoted().map(Scalar::String);
        }
        let start = self.pos;
        let mut raw = String::new();
        while let Some(c) = self.peek() {
            if c == '\n' || c == ',' || c == '}' || c == '#' || self.at("//") {
                break;
            }
            if c == '"' || c == '{' || c == '[' || c == '=' {
                return Err(self.error(format!("unexpected `{c}` in value")));
            }
            raw.push(c);
            self.pos += 1;
        }
        let raw = raw.trim_end();
        if raw.is_empty() {
            return Err(self.error_at(start, "expected a value"));
        }
        Ok(match raw {
            "true" | "yes" | "on" => Scalar::Bool(true),
            "false" | "no" | "off" => Scalar::Bool(false),
            _ => {
                if let Ok(i) = raw.parse::<i64>() {
                    Scalar::Int(i)
                } else if raw.contains(['.', 'e', 'E'])
                    && raw.parse::<f64>().is_ok_and(f64::is_finite)
                {
                    Scalar::Float(raw.parse().unwrap())
                } else {
                    Scalar::String(raw.to_owned())
                }
            }
        })
    }
}
