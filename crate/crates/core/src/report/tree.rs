use std::fmt::Write;
use std::str::FromStr;

use crate::kb::{Characteristic, KnowledgeBase, ThreatCode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeFormat {
    Dot,
    Markdown,
}

impl TreeFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TreeFormat::Dot => "dot",
            TreeFormat::Markdown => "md",
        }
    }
}

impl FromStr for TreeFormat {
    type Err = super::ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(TreeFormat::Dot),
            "md" | "markdown" => Ok(TreeFormat::Markdown),
            other => Err(super::ReportError::UnsupportedFormat(other.to_string())),
        }
    }
}

fn dot_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}

/// Renders the threat tree of one type. Pass a filtered KB to get a
/// domain-specific tree.
pub fn render_tree(kb: &KnowledgeBase, code: ThreatCode, format: TreeFormat) -> String {
    match format {
        TreeFormat::Dot => render_dot(kb, code),
        TreeFormat::Markdown => render_markdown(kb, code),
    }
}

fn render_dot(kb: &KnowledgeBase, code: ThreatCode) -> String {
    let root = kb.hierarchy().root();
    let ty = kb.threat_type(code);
    let mut out = String::new();
    writeln!(out, "digraph \"{}\" {{", dot_escape(code.as_str())).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    writeln!(out, "  node [shape=box, fontname=\"Helvetica\"];").unwrap();
    writeln!(
        out,
        "  \"{}\" [label=\"{}\", shape=ellipse, style=bold];",
        code,
        dot_escape(&format!("{} {}", code, ty.name))
    )
    .unwrap();

    let nodes: Vec<&Characteristic> = kb.characteristics_of(code).collect();
    for c in &nodes {
        let mut label = format!("{} {}", c.id, c.title);
        if &c.domain != root {
            label.push_str(&format!("\n[{}]", c.domain));
        }
        let mut attrs = format!("label=\"{}\"", dot_escape(&label));
        if c.structural {
            attrs.push_str(", style=dashed");
        }
        writeln!(out, "  \"{}\" [{}];", c.id, attrs).unwrap();
    }
    for c in &nodes {
        let parent =
            c.id.parent()
                .map(|p| p.to_string())
                .unwrap_or_else(|| code.to_string());
        writeln!(out, "  \"{}\" -> \"{}\";", parent, c.id).unwrap();
    }
    out.push_str("}\n");
    out
}

fn render_markdown(kb: &KnowledgeBase, code: ThreatCode) -> String {
    let root = kb.hierarchy().root();
    let ty = kb.threat_type(code);
    let mut out = format!("# {} {}\n\n{}\n\n", code, ty.name, ty.definition);
    let nodes: Vec<&Characteristic> = kb.characteristics_of(code).collect();
    if nodes.is_empty() {
        out.push_str("_No characteristics._\n");
        return out;
    }
    // Canonical id order is a depth-first pre-order of the forest.
    for c in nodes {
        let indent = "  ".repeat(c.id.depth() - 1);
        write!(out, "{indent}- {} {}", c.id, c.title).unwrap();
        if &c.domain != root {
            write!(out, " `[{}]`", c.domain).unwrap();
        }
        if c.structural {
            out.push_str(" _(structural)_");
        }
        out.push('\n');
    }
    out
}
