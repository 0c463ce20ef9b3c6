use super::math::{split_math, MathSpan, TextSpan};
use super::tokenizer::{line_col, Attr, Token, Tokenizer, RAW_TEXT};
use super::SlideError;
use crate::languages;

pub const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track",
    "wbr",
];

/// Classes on `code` elements that change presentation behaviour.
pub const BEHAVIOURAL_CLASSES: &[&str] = &[
    "hidden",
    "states",
    "state-fragments",
    "no-infos",
    "no-warnings",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodeSource {
    Inline,
    File(String),
    Snippet(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeBlock {
    /// Synchronised document id.
    pub id: String,
    /// From a language class, else from the file extension.
    pub language: Option<String>,
    pub src: CodeSource,
    /// All classes in source order.
    pub classes: Vec<String>,
    /// Attributes other than `src`, `class` and `data-doc`.
    pub attrs: Vec<Attr>,
    /// Verbatim element content for inline blocks.
    pub inline_text: Option<String>,
}

impl CodeBlock {
    pub fn has_class(&self, class: &str) -> bool {
        self.classes.iter().any(|c| c == class)
    }

    pub fn is_hidden(&self) -> bool {
        self.has_class("hidden")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<Attr>,
    pub children: Vec<Node>,
    /// Written as `<x/>` or a void element: no end tag.
    pub void: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
    Math(MathSpan),
    Code(CodeBlock),
    Comment(String),
    Declaration(String),
    /// Raw content of `script`/`style` elements; the element is the parent.
    RawText(String),
    /// Position of `vertical_children[i]` among the slide's children.
    VerticalSlide(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Slide {
    pub attrs: Vec<Attr>,
    pub children: Vec<Node>,
    pub vertical_children: Vec<Slide>,
}

/// Top-level content that is not a slide, placed before slide
/// `before_slide` (or after all slides).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loose {
    pub before_slide: usize,
    pub node: Node,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Deck {
    pub slides: Vec<Slide>,
    pub loose: Vec<Loose>,
}

fn walk_code<'a>(nodes: &'a [Node], out: &mut Vec<&'a CodeBlock>) {
    for n in nodes {
        match n {
            Node::Code(c) => out.push(c),
            Node::Element(e) => walk_code(&e.children, out),
            _ => {}
        }
    }
}

fn slide_code<'a>(slide: &'a Slide, out: &mut Vec<&'a CodeBlock>) {
    for n in &slide.children {
        match n {
            Node::VerticalSlide(i) => slide_code(&slide.vertical_children[*i], out),
            other => walk_code(std::slice::from_ref(other), out),
        }
    }
}

impl Deck {
    /// Code blocks outside every section.
    pub fn hidden_code(&self) -> Vec<&CodeBlock> {
        let mut out = Vec::new();
        for l in &self.loose {
            walk_code(std::slice::from_ref(&l.node), &mut out);
        }
        out
    }

    /// Every code block in document order.
    pub fn code_blocks(&self) -> Vec<&CodeBlock> {
        let mut out = Vec::new();
        let mut loose = self.loose.iter().peekable();
        for (i, slide) in self.slides.iter().enumerate() {
            while let Some(l) = loose.next_if(|l| l.before_slide <= i) {
                walk_code(std::slice::from_ref(&l.node), &mut out);
            }
            slide_code(slide, &mut out);
        }
        for l in loose {
            walk_code(std::slice::from_ref(&l.node), &mut out);
        }
        out
    }
}

fn attr<'a>(attrs: &'a [Attr], name: &str) -> Option<&'a str> {
    attrs
        .iter()
        .find(|a| a.name == name)
        .and_then(|a| a.value.as_deref())
}

/// Normalizes a relative source path: `.` segments vanish, `..` pops.
/// `None` for absolute paths or paths leaving the presentation directory.
pub fn normalize_path(path: &str) -> Option<String> {
    if path.starts_with('/') || path.contains('\\') || path.contains(':') {
        return None;
    }
    let mut parts: Vec<&str> = Vec::new();
    for seg in path.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                parts.pop()?;
            }
            s => parts.push(s),
        }
    }
    (!parts.is_empty()).then(|| parts.join("/"))
}

struct Builder {
    inline_count: usize,
}

enum Frame {
    Section { slide: Slide, offset: usize },
    Element(Element),
}

impl Builder {
    fn code_block(&mut self, attrs: Vec<Attr>, text: String) -> CodeBlock {
        let classes: Vec<String> = attr(&attrs, "class")
            .map(|c| c.split_whitespace().map(str::to_owned).collect())
            .unwrap_or_default();
        let src = match attr(&attrs, "src") {
            Some(s) if s.starts_with('#') => CodeSource::Snippet(s[1..].to_owned()),
            Some(s) => CodeSource::File(s.to_owned()),
            None => CodeSource::Inline,
        };
        let language = classes
            .iter()
            .find(|c| languages::lookup(c).is_some())
            .cloned()
            .or_else(|| match &src {
                CodeSource::File(p) => languages::for_path(p).map(|l| l.id.to_owned()),
                _ => None,
            });
        let generated = match &src {
            CodeSource::Inline => {
                self.inline_count += 1;
                format!("inline-{}", self.inline_count)
            }
            CodeSource::File(p) => {
                format!("file-{}", normalize_path(p).unwrap_or_else(|| p.clone()))
            }
            CodeSource::Snippet(n) => format!("snip-{n}"),
        };
        let id = attr(&attrs, "data-doc").map_or(generated, str::to_owned);
        let inline_text = matches!(src, CodeSource::Inline).then_some(text);
        CodeBlock {
            id,
            language,
            src,
            classes,
            attrs: attrs
                .into_iter()
                .filter(|a| !matches!(a.name.as_str(), "src" | "class" | "data-doc"))
                .collect(),
            inline_text,
        }
    }
}

fn push_text(target: &mut Vec<Node>, text: String) {
    for span in split_math(&text) {
        target.push(match span {
            TextSpan::Text(t) => Node::Text(t),
            TextSpan::Math(m) => Node::Math(m),
        });
    }
}

/// Parses the headerless slide markup.
pub fn parse_slides(html: &str) -> Result<Deck, SlideError> {
    let chars: Vec<char> = html.chars().collect();
    let tokens = Tokenizer::new(&chars).tokenize()?;
    let mut builder = Builder { inline_count: 0 };
    let mut deck = Deck::default();
    let mut stack: Vec<Frame> = Vec::new();
    let mut tokens = tokens.into_iter();

    fn children(stack: &mut [Frame]) -> Option<&mut Vec<Node>> {
        match stack.last_mut()? {
            Frame::Section { slide, .. } => Some(&mut slide.children),
            Frame::Element(e) => Some(&mut e.children),
        }
    }

    fn emit(deck: &mut Deck, stack: &mut [Frame], node: Node) {
        match children(stack) {
            Some(c) => c.push(node),
            None => deck.loose.push(Loose {
                before_slide: deck.slides.len(),
                node,
            }),
        }
    }

    /// Closes the innermost open element, attaching it to its parent.
    fn close_top(deck: &mut Deck, stack: &mut Vec<Frame>) {
        match stack.pop() {
            Some(Frame::Element(e)) => emit(deck, stack, Node::Element(e)),
            Some(Frame::Section { slide, .. }) => match stack.last_mut() {
                Some(Frame::Section { slide: parent, .. }) => {
                    parent
                        .children
                        .push(Node::VerticalSlide(parent.vertical_children.len()));
                    parent.vertical_children.push(slide);
                }
                _ => deck.slides.push(slide),
            },
            None => {}
        }
    }

    while let Some(token) = tokens.next() {
        match token {
            Token::Text(t) => {
                let mut nodes = Vec::new();
                push_text(&mut nodes, t);
                for n in nodes {
                    emit(&mut deck, &mut stack, n);
                }
            }
            Token::Comment(c) => emit(&mut deck, &mut stack, Node::Comment(c)),
            Token::Declaration(d) => emit(&mut deck, &mut stack, Node::Declaration(d)),
            Token::RawText { .. } => unreachable!("raw text follows its start tag"),
            Token::Start {
                name,
                attrs,
                self_closing,
                offset,
            } => {
                if name == "section" {
                    let sections = stack
                        .iter()
                        .filter(|f| matches!(f, Frame::Section { .. }))
                        .count();
                    let (line, col) = line_col(&chars, offset);
                    let nested_in_element = matches!(stack.last(), Some(Frame::Element(_)));
                    if sections >= 2 {
                        return Err(SlideError::Structure {
                            line,
                            col,
                            message: "sections may be nested one level deep at most".into(),
                        });
                    }
                    if nested_in_element {
                        return Err(SlideError::Structure {
                            line,
                            col,
                            message: "a section must be top-level or directly inside a section"
                                .into(),
                        });
                    }
                    let slide = Slide {
                        attrs,
                        ..Slide::default()
                    };
                    if self_closing {
                        stack.push(Frame::Section { slide, offset });
                        close_top(&mut deck, &mut stack);
                    } else {
                        stack.push(Frame::Section { slide, offset });
                    }
                    continue;
                }
                if RAW_TEXT.contains(&name.as_str()) && !self_closing {
                    let Some(Token::RawText { text, closed }) = tokens.next() else {
                        unreachable!("tokenizer emits raw text after raw-text elements")
                    };
                    if !closed {
                        let (line, col) = line_col(&chars, offset);
                        return Err(SlideError::Parse {
                            line,
                            col,
                            message: format!("unclosed `{name}` element"),
                        });
                    }
                    let node = if name == "code" {
                        Node::Code(builder.code_block(attrs, text))
                    } else {
                        Node::Element(Element {
                            name,
                            attrs,
                            children: vec![Node::RawText(text)],
                            void: false,
                        })
                    };
                    emit(&mut deck, &mut stack, node);
                    continue;
                }
                if name == "code" {
                    let node = Node::Code(builder.code_block(attrs, String::new()));
                    emit(&mut deck, &mut stack, node);
                    continue;
                }
                let void = self_closing || VOID_ELEMENTS.contains(&name.as_str());
                let element = Element {
                    name,
                    attrs,
                    children: Vec::new(),
                    void,
                };
                if void {
                    emit(&mut deck, &mut stack, Node::Element(element));
                } else {
                    stack.push(Frame::Element(element));
                }
            }
            Token::End { name } => {
                // Close up to the nearest matching open element; stray end
                // tags are ignored. Elements never close across a section.
                let target = stack.iter().rposition(|f| match f {
                    Frame::Element(e) => e.name == name,
                    Frame::Section { .. } => name == "section",
                });
                let blocked = target.is_some_and(|t| {
                    name != "section"
                        && stack[t..]
                            .iter()
                            .any(|f| matches!(f, Frame::Section { .. }))
                });
                if let (Some(t), false) = (target, blocked) {
                    while stack.len() > t {
                        close_top(&mut deck, &mut stack);
                    }
                }
            }
        }
    }
    while let Some(frame) = stack.last() {
        if let Frame::Section { offset, .. } = frame {
            let (line, col) = line_col(&chars, *offset);
            return Err(SlideError::Parse {
                line,
                col,
                message: "unclosed section".into(),
            });
        }
        close_top(&mut deck, &mut stack);
    }
    Ok(deck)
}
