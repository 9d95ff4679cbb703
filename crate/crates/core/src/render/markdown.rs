use std::fmt::Write;

use super::document::{Block, Document, Field, Group};

fn cell(s: &str) -> String {
    s.replace('|', "\\|")
}

fn fields(out: &mut String, fields: &[Field]) {
    for f in fields {
        let _ = writeln!(out, "- **{}:** {}", f.label, f.value);
    }
    out.push('\n');
}

/// GitHub-flavored Markdown with one H2 per section and LF line endings.
pub fn render_markdown(doc: &Document) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}\n", doc.title);
    fields(&mut out, &doc.header);

    out.push_str("Contents:\n\n");
    let mut group: Option<Group> = None;
    for s in &doc.sections {
        if group != Some(s.group) {
            let _ = writeln!(out, "- {}", s.group.title());
            group = Some(s.group);
        }
        let _ = writeln!(out, "  - [{}](#{})", s.title, s.anchor());
    }
    out.push('\n');

    let mut group: Option<Group> = None;
    for s in &doc.sections {
        if group != Some(s.group) {
            let _ = writeln!(out, "_{}_\n", s.group.title());
            group = Some(s.group);
        }
        let _ = writeln!(out, "## {}\n", s.title);
        for block in &s.blocks {
            match block {
                Block::Para { text, .. } => {
                    let _ = writeln!(out, "{text}\n");
                }
                Block::Subheading(text) => {
                    let _ = writeln!(out, "### {text}\n");
                }
                Block::Fields(fs) => fields(&mut out, fs),
                Block::List { items, .. } => {
                    for item in items {
                        let _ = writeln!(out, "- {item}");
                    }
                    out.push('\n');
                }
                Block::Link { label, url, .. } => {
                    let _ = writeln!(out, "{label}: [{url}]({url})\n");
                }
                Block::Table { caption, header, rows, csv, .. } => {
                    let _ = writeln!(out, "**{caption}**\n");
                    let _ = writeln!(out, "| {} |", header.iter().map(|h| cell(h)).collect::<Vec<_>>().join(" | "));
                    let _ = writeln!(out, "|{}", " --- |".repeat(header.len()));
                    for row in rows {
                        let _ = writeln!(out, "| {} |", row.iter().map(|c| cell(c)).collect::<Vec<_>>().join(" | "));
                    }
                    out.push('\n');
                    if let Some(csv) = csv {
                        let _ = writeln!(out, "Data: `{csv}`\n");
                    }
                }
            }
        }
    }
    while out.ends_with("\n\n") {
        out.pop();
    }
    out
}
