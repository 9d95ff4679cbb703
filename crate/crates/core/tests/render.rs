mod common;

use mlsds::render::{build_document, render_html, render_markdown, slug, Datasheet, SECTION_TITLES};

fn minimal() -> Datasheet {
    let mut d = common::fixture_datasheet();
    d.study = None;
    d.manifest.features.clear();
    d.manifest.compliance.clear();
    d.privacy.sensors_present.clear();
    d.privacy.security_mechanisms.clear();
    d.nutrition.upstream_sources.clear();
    d
}

#[test]
fn fixture_shows_headline_footprint() {
    let md = render_markdown(&build_document(&common::fixture_datasheet()));
    assert!(md.lines().any(|l| l == "Total carbon footprint: 2.34 kg CO2-eq"));
}

#[test]
fn missing_study_renders_placeholder() {
    let doc = build_document(&minimal());
    let md = render_markdown(&doc);
    assert!(md.contains("\n## End-to-End Performance Analysis\n\nEnd-to-End Performance Analysis: not provided\n"));
    assert!(render_html(&doc).contains("<p>End-to-End Performance Analysis: not provided</p>"));
}

#[test]
fn empty_lists_render_none_declared() {
    let d = minimal();
    let html = render_html(&build_document(&d));
    let features = html.split("<h3>Features</h3>").nth(1).unwrap();
    assert!(features.starts_with("\n<ul>\n<li>none declared</li>\n</ul>"), "{}", &features[..80]);
    let md = render_markdown(&build_document(&d));
    assert!(md.contains("### Features\n\n- none declared\n"));
}

#[test]
fn minimal_datasheet_has_full_coverage() {
    let problems = common::coverage_problems(&minimal());
    assert!(problems.is_empty(), "{problems:#?}");
}

#[test]
fn html_anchors_match_markdown_headings() {
    let doc = build_document(&common::fixture_datasheet());
    let md = render_markdown(&doc);
    let html = render_html(&doc);
    for (_, title) in SECTION_TITLES {
        assert!(md.contains(&format!("\n## {title}\n")));
        assert!(md.contains(&format!("](#{})", slug(title))));
        assert!(html.contains(&format!("<h2 id=\"{}\">", slug(title))), "{title}");
    }
    assert_eq!(html.matches("<h2 ").count(), 9);
}

#[test]
fn secondary_layer_is_a_hyperlink() {
    let html = render_html(&build_document(&common::fixture_datasheet()));
    assert!(html.contains(r#"<a href="https://example.org/persondet/privacy">"#));
}

#[test]
fn markup_in_values_is_escaped() {
    let mut d = minimal();
    d.manifest.features = vec!["<script>alert(1)</script> & more".into()];
    d.manifest.name = "a|b".into();
    let doc = build_document(&d);
    let html = render_html(&doc);
    assert!(html.contains("&lt;script&gt;alert(1)&lt;/script&gt; &amp; more"));
    assert!(!html.contains("<script>"));
    for v in doc.values() {
        assert!(html.contains(&mlsds::render::escape_html(v)), "{v}");
    }
}

#[test]
fn rendering_is_deterministic() {
    let d = common::fixture_datasheet();
    let (a, b) = (build_document(&d), build_document(&d));
    assert_eq!(render_markdown(&a), render_markdown(&b));
    assert_eq!(render_html(&a), render_html(&b));
}
