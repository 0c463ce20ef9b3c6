use serde::Serialize;

use super::deck::{CodeBlock, CodeSource, Deck, Element, Node, Slide};
use super::math::{join_math, TextSpan};
use super::tokenizer::Attr;
use crate::config::Settings;

pub const PROTOCOL_VERSION: u32 = 1;
pub const SLIDES_BEGIN: &str = "<!-- cobra:slides -->";
pub const SLIDES_END: &str = "<!-- /cobra:slides -->";

pub fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn write_attrs(out: &mut String, attrs: &[Attr]) {
    for a in attrs {
        out.push(' ');
        out.push_str(&a.name);
        if let Some(v) = &a.value {
            let q = if v.contains('"') { '\'' } else { '"' };
            out.push('=');
            out.push(q);
            out.push_str(v);
            out.push(q);
        }
    }
}

fn write_code(out: &mut String, c: &CodeBlock) {
    out.push_str("<code");
    let mut attrs = vec![Attr {
        name: "data-doc".into(),
        value: Some(c.id.clone()),
    }];
    if !c.classes.is_empty() {
        attrs.push(Attr {
            name: "class".into(),
            value: Some(c.classes.join(" ")),
        });
    }
    match &c.src {
        CodeSource::Inline => {}
        CodeSource::File(p) => attrs.push(Attr {
            name: "src".into(),
            value: Some(p.clone()),
        }),
        CodeSource::Snippet(n) => attrs.push(Attr {
            name: "src".into(),
            value: Some(format!("#{n}")),
        }),
    }
    attrs.extend(c.attrs.iter().cloned());
    write_attrs(out, &attrs);
    out.push('>');
    out.push_str(c.inline_text.as_deref().unwrap_or(""));
    out.push_str("</code>");
}

fn write_nodes(out: &mut String, nodes: &[Node], verticals: &[Slide]) {
    // Adjacent text and math are written together so escaping stays
    // consistent with a re-split.
    let mut run: Vec<TextSpan> = Vec::new();
    let flush = |out: &mut String, run: &mut Vec<TextSpan>| {
        out.push_str(&join_math(run));
        run.clear();
    };
    for n in nodes {
        match n {
            Node::Text(t) => {
                run.push(TextSpan::Text(t.clone()));
                continue;
            }
            Node::Math(m) => {
                run.push(TextSpan::Math(m.clone()));
                continue;
            }
            _ => flush(out, &mut run),
        }
        match n {
            Node::Element(e) => write_element(out, e),
            Node::Code(c) => write_code(out, c),
            Node::Comment(c) => {
                out.push_str("<!--");
                out.push_str(c);
                out.push_str("-->");
            }
            Node::Declaration(d) => {
                out.push_str("<!");
                out.push_str(d);
                out.push('>');
            }
            Node::RawText(t) => out.push_str(t),
            Node::VerticalSlide(i) => write_slide(out, &verticals[*i]),
            Node::Text(_) | Node::Math(_) => unreachable!(),
        }
    }
    flush(out, &mut run);
}

fn write_element(out: &mut String, e: &Element) {
    out.push('<');
    out.push_str(&e.name);
    write_attrs(out, &e.attrs);
    if e.void {
        out.push_str("/>");
        return;
    }
    out.push('>');
    write_nodes(out, &e.children, &[]);
    out.push_str("</");
    out.push_str(&e.name);
    out.push('>');
}

fn write_slide(out: &mut String, s: &Slide) {
    out.push_str("<section");
    write_attrs(out, &s.attrs);
    out.push('>');
    write_nodes(out, &s.children, &s.vertical_children);
    out.push_str("</section>");
}

/// The deck as slide markup; [`super::parse_slides`] reads it back into an
/// equal deck.
pub fn render_deck(deck: &Deck) -> String {
    let mut out = String::new();
    let mut loose = deck.loose.iter().peekable();
    for (i, slide) in deck.slides.iter().enumerate() {
        while let Some(l) = loose.next_if(|l| l.before_slide <= i) {
            write_nodes(&mut out, std::slice::from_ref(&l.node), &[]);
        }
        write_slide(&mut out, slide);
    }
    for l in loose {
        write_nodes(&mut out, std::slice::from_ref(&l.node), &[]);
    }
    out
}

/// The deck markup between the slide markers of a rendered page.
pub fn slides_markup(page: &str) -> Option<&str> {
    let start = page.find(SLIDES_BEGIN)? + SLIDES_BEGIN.len();
    let end = page[start..].find(SLIDES_END)? + start;
    Some(&page[start..end])
}

#[derive(Serialize)]
struct BootDoc<'a> {
    id: &'a str,
    language: Option<&'a str>,
    classes: &'a [String],
    hidden: bool,
    /// Variant count of each fragment in the view, in view order.
    variants: &'a [usize],
}

#[derive(Serialize)]
struct Boot<'a> {
    protocol_version: u32,
    title: &'a str,
    transition: &'a str,
    language: &'a str,
    show_infos: bool,
    show_warnings: bool,
    mathjax: &'a std::collections::BTreeMap<String, String>,
    docs: Vec<BootDoc<'a>>,
}

/// Per document, the variant count of each code fragment.
pub type FragmentVariants = std::collections::BTreeMap<String, Vec<usize>>;

/// JSON configuration the client reads from the page.
pub fn boot_config(deck: &Deck, settings: &Settings) -> String {
    boot_config_with(deck, settings, &FragmentVariants::new())
}

pub fn boot_config_with(deck: &Deck, settings: &Settings, variants: &FragmentVariants) -> String {
    let mut docs: Vec<BootDoc> = Vec::new();
    for c in deck.code_blocks() {
        if docs.iter().any(|d| d.id == c.id) {
            continue;
        }
        docs.push(BootDoc {
            id: &c.id,
            language: c.language.as_deref(),
            classes: &c.classes,
            hidden: c.is_hidden(),
            variants: variants.get(&c.id).map_or(&[], Vec::as_slice),
        });
    }
    let boot = Boot {
        protocol_version: PROTOCOL_VERSION,
        title: &settings.title,
        transition: &settings.reveal_transition,
        language: &settings.language,
        show_infos: settings.show_infos,
        show_warnings: settings.show_warnings,
        mathjax: &settings.mathjax,
        docs,
    };
    serde_json::to_string(&boot)
        .expect("boot config serializes")
        .replace("</", "<\\/")
}

/// The complete HTML page for a deck.
pub fn render_boilerplate(deck: &Deck, settings: &Settings) -> String {
    render_page(deck, settings, &FragmentVariants::new())
}

/// [`render_boilerplate`] with the fragment structure of the live views.
pub fn render_page(deck: &Deck, settings: &Settings, variants: &FragmentVariants) -> String {
    let title = escape_html(&settings.title);
    let slides_theme = escape_html(&settings.theme_slides);
    let code_theme = escape_html(&settings.theme_code);
    let transition = escape_html(&settings.reveal_transition);
    format!(
        r#"<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<title>{title}</title>
<link rel="stylesheet" href="/client/cobra.css">
<link rel="stylesheet" href="/client/theme/{slides_theme}.css">
<link rel="stylesheet" href="/client/code/{code_theme}.css">
</head>
<body>
<div class="reveal" data-transition="{transition}"><div class="slides">
{SLIDES_BEGIN}{}{SLIDES_END}
</div></div>
<script id="cobra-boot" type="application/json">{}</script>
<script src="/client/cobra.js"></script>
</body>
</html>
"#,
        render_deck(deck),
        boot_config_with(deck, settings, variants),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slidedoc::parse_slides;

    #[test]
    fn title_and_determinism() {
        let s = Settings::default();
        let a = render_boilerplate(&Deck::default(), &s);
        assert!(a.contains("<title>Untitled Presentation</title>"));
        assert_eq!(a, render_boilerplate(&Deck::default(), &s));
    }

    #[test]
    fn title_is_escaped() {
        let s = Settings {
            title: "a < b & </title>".into(),
            ..Settings::default()
        };
        let page = render_boilerplate(&Deck::default(), &s);
        assert!(page.contains("<title>a &lt; b &amp; &lt;/title&gt;</title>"));
    }

    #[test]
    fn one_slide_reparses() {
        let deck =
            parse_slides("<section class=\"x\"><h2>Hi $x$ \\$</h2><img src=a.png></section>")
                .unwrap();
        let page = render_boilerplate(&deck, &Settings::default());
        let again = parse_slides(slides_markup(&page).unwrap()).unwrap();
        assert_eq!(again, deck);
        assert_eq!(again.slides.len(), 1);
    }
}
