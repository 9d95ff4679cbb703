use std::fmt::Write;

use super::document::{Block, Document, Field, Group};

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

const STYLE: &str = "body{font-family:sans-serif;max-width:60em;margin:2em auto;padding:0 1em;line-height:1.4}\
table{border-collapse:collapse;margin:0.5em 0}th,td{border:1px solid #999;padding:0.2em 0.6em;text-align:left}\
caption{font-weight:bold;text-align:left}.group{color:#555;font-style:italic}";

fn fields(out: &mut String, fields: &[Field]) {
    out.push_str("<dl>\n");
    for f in fields {
        let _ = writeln!(out, "<dt>{}</dt><dd>{}</dd>", escape(&f.label), escape(&f.value));
    }
    out.push_str("</dl>\n");
}

/// A standalone HTML page. Section ids match the Markdown heading anchors.
pub fn render_html(doc: &Document) -> String {
    let mut out = String::new();
    let title = escape(&doc.title);
    let _ = write!(
        out,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{title}</title>\n<style>{STYLE}</style>\n</head>\n<body>\n<h1>{title}</h1>\n"
    );
    fields(&mut out, &doc.header);

    out.push_str("<nav>\n<p>Contents:</p>\n<ul>\n");
    let mut group: Option<Group> = None;
    for s in &doc.sections {
        if group != Some(s.group) {
            if group.is_some() {
                out.push_str("</ul></li>\n");
            }
            let _ = writeln!(out, "<li>{}<ul>", escape(s.group.title()));
            group = Some(s.group);
        }
        let _ = writeln!(out, "<li><a href=\"#{}\">{}</a></li>", s.anchor(), escape(s.title));
    }
    out.push_str("</ul></li>\n</ul>\n</nav>\n");

    let mut group: Option<Group> = None;
    for s in &doc.sections {
        if group != Some(s.group) {
            let _ = writeln!(out, "<p class=\"group\">{}</p>", escape(s.group.title()));
            group = Some(s.group);
        }
        let _ = writeln!(out, "<section>\n<h2 id=\"{}\">{}</h2>", s.anchor(), escape(s.title));
        for block in &s.blocks {
            match block {
                Block::Para { text, .. } => {
                    let _ = writeln!(out, "<p>{}</p>", escape(text));
                }
                Block::Subheading(text) => {
                    let _ = writeln!(out, "<h3>{}</h3>", escape(text));
                }
                Block::Fields(fs) => fields(&mut out, fs),
                Block::List { items, .. } => {
                    out.push_str("<ul>\n");
                    for item in items {
                        let _ = writeln!(out, "<li>{}</li>", escape(item));
                    }
                    out.push_str("</ul>\n");
                }
                Block::Link { label, url, .. } => {
                    let url = escape(url);
                    let _ = writeln!(out, "<p>{}: <a href=\"{url}\">{url}</a></p>", escape(label));
                }
                Block::Table { caption, header, rows, csv, .. } => {
                    let _ = writeln!(out, "<table>\n<caption>{}</caption>", escape(caption));
                    out.push_str("<tr>");
                    for h in header {
                        let _ = write!(out, "<th>{}</th>", escape(h));
                    }
                    out.push_str("</tr>\n");
                    for row in rows {
                        out.push_str("<tr>");
                        for c in row {
                            let _ = write!(out, "<td>{}</td>", escape(c));
                        }
                        out.push_str("</tr>\n");
                    }
                    out.push_str("</table>\n");
                    if let Some(csv) = csv {
                        let _ = writeln!(out, "<p>Data: <code>{}</code></p>", escape(csv));
                    }
                }
            }
        }
        out.push_str("</section>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}
