use super::SlideError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attr {
    pub name: String,
    pub value: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Token {
    Text(String),
    Start {
        name: String,
        attrs: Vec<Attr>,
        self_closing: bool,
        offset: usize,
    },
    End {
        name: String,
    },
    Comment(String),
    /// `<!doctype ...>` and similar declarations, kept verbatim.
    Declaration(String),
    /// Content of a raw-text element (`code`, `script`, `style`), followed
    /// by its end tag.
    RawText {
        text: String,
        closed: bool,
    },
}

pub(crate) const RAW_TEXT: &[&str] = &["code", "script", "style"];

pub(crate) fn line_col(chars: &[char], offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for &c in &chars[..offset.min(chars.len())] {
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

pub(crate) struct Tokenizer<'a> {
    chars: &'a [char],
    pos: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '_' || c == ':' || c == '.'
}

impl<'a> Tokenizer<'a> {
    pub fn new(chars: &'a [char]) -> Self {
        Self { chars, pos: 0 }
    }

    fn error(&self, offset: usize, message: impl Into<String>) -> SlideError {
        let (line, col) = line_col(self.chars, offset);
        SlideError::Parse {
            line,
            col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn at(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.chars.get(self.pos + i) == Some(&c))
    }

    fn at_ignore_case(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| {
            self.chars
                .get(self.pos + i)
                .is_some_and(|d| d.eq_ignore_ascii_case(&c))
        })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn collect_until(&mut self, end: &str) -> Option<String> {
        let start = self.pos;
        while self.pos < self.chars.len() {
            if self.at(end) {
                let s = self.chars[start..self.pos].iter().collect();
                self.pos += end.chars().count();
                return Some(s);
            }
            self.pos += 1;
        }
        None
    }

    pub fn tokenize(mut self) -> Result<Vec<Token>, SlideError> {
        let mut out = Vec::new();
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c != '<' {
                text.push(c);
                self.pos += 1;
                continue;
            }
            let next = self.chars.get(self.pos + 1).copied();
            let starts_markup = match next {
                Some('!') => true,
                Some('/') => self
                    .chars
                    .get(self.pos + 2)
                    .is_some_and(|c| c.is_alphabetic()),
                Some(c) => c.is_alphabetic(),
                None => false,
            };
            if !starts_markup {
                text.push(c);
                self.pos += 1;
                continue;
            }
            if !text.is_empty() {
                out.push(Token::Text(std::mem::take(&mut text)));
            }
            let start = self.pos;
            if self.at("<!--") {
                self.pos += 4;
                let body = self
                    .collect_until("-->")
                    .ok_or_else(|| self.error(start, "unterminated comment"))?;
                out.push(Token::Comment(body));
            } else if next == Some('!') {
                self.pos += 2;
                let body = self
                    .collect_until(">")
                    .ok_or_else(|| self.error(start, "unterminated declaration"))?;
                out.push(Token::Declaration(body));
            } else if next == Some('/') {
                self.pos += 2;
                let name = self.name();
                self.skip_ws();
                if self.peek() != Some('>') {
                    return Err(self.error(start, format!("malformed end tag `</{name}`")));
                }
                self.pos += 1;
                out.push(Token::End { name });
            } else {
                let token = self.start_tag(start)?;
                let raw = match &token {
                    Token::Start {
                        name, self_closing, ..
                    } if !self_closing && RAW_TEXT.contains(&name.as_str()) => Some(name.clone()),
                    _ => None,
                };
                out.push(token);
                if let Some(name) = raw {
                    out.push(self.raw_text(&name));
                }
            }
        }
        if !text.is_empty() {
            out.push(Token::Text(text));
        }
        Ok(out)
    }

    fn name(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if is_name_char(c) {
                s.push(c.to_ascii_lowercase());
                self.pos += 1;
            } else {
                break;
            }
        }
        s
    }

    fn start_tag(&mut self, start: usize) -> Result<Token, SlideError> {
        self.pos += 1;
        let name = self.name();
        let mut attrs = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(self.error(start, format!("unterminated tag `<{name}`"))),
                Some('>') => {
                    self.pos += 1;
                    return Ok(Token::Start {
                        name,
                        attrs,
                        self_closing: false,
                        offset: start,
                    });
                }
                Some('/') if self.chars.get(self.pos + 1) == Some(&'>') => {
                    self.pos += 2;
                    return Ok(Token::Start {
                        name,
                        attrs,
                        self_closing: true,
                        offset: start,
                    });
                }
                Some(_) => attrs.push(self.attribute()?),
            }
        }
    }

    fn attribute(&mut self) -> Result<Attr, SlideError> {
        let start = self.pos;
        let mut name = String::new();
        while let Some(c) = self.peek() {
            if c.is_whitespace() || "\"'<>/=".contains(c) {
                break;
            }
            name.push(c.to_ascii_lowercase());
            self.pos += 1;
        }
        if name.is_empty() {
            return Err(self.error(start, "malformed attribute"));
        }
        self.skip_ws();
        if self.peek() != Some('=') {
            return Ok(Attr { name, value: None });
        }
        self.pos += 1;
        self.skip_ws();
        let value = match self.peek() {
            Some(q @ ('"' | '\'')) => {
                self.pos += 1;
                self.collect_until(&q.to_string()).ok_or_else(|| {
                    self.error(start, format!("unterminated value of attribute `{name}`"))
                })?
            }
            _ => {
                let mut v = String::new();
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '>' || "\"'<=`".contains(c) {
                        break;
                    }
                    v.push(c);
                    self.pos += 1;
                }
                if v.is_empty() {
                    return Err(self.error(start, format!("attribute `{name}` has no value")));
                }
                v
            }
        };
        Ok(Attr {
            name,
            value: Some(value),
        })
    }

    /// Everything up to the literal `</name`; the end tag is consumed.
    fn raw_text(&mut self, name: &str) -> Token {
        let close = format!("</{name}");
        let start = self.pos;
        while self.pos < self.chars.len() {
            if self.at_ignore_case(&close) {
                let text = self.chars[start..self.pos].iter().collect();
                self.pos += close.chars().count();
                while let Some(c) = self.peek() {
                    self.pos += 1;
                    if c == '>' {
                        break;
                    }
                }
                return Token::RawText { text, closed: true };
            }
            self.pos += 1;
        }
        Token::RawText {
            text: self.chars[start..].iter().collect(),
            closed: false,
        }
    }
}
