use qpbraid::bplus::{sample_bplus, Region};
use qpbraid::branch::{analyze, DEFAULT_BUDGET};
use qpbraid::path::LoopPath;
use qpbraid::poly::parse_polynomial;
use qpbraid::render::{render_braid_svg, render_plane_svg};
use qpbraid::BraidWord;

#[test]
fn square_root_plane_picture() {
    let (f, b) = analyze(&parse_polynomial("w^2 - z").unwrap(), DEFAULT_BUDGET, None).unwrap();
    let g = sample_bplus(&f, &b, Region::new(-2.0, -2.0, 2.0, 2.0).unwrap(), 32).unwrap();
    let l = LoopPath::circle(num_complex::Complex64::new(0.0, 0.0), 1.0, true).unwrap();
    let svg = render_plane_svg(&g, Some(&l), &b).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches(r#"class="edge" data-label="1""#).count(), 1);
    assert_eq!(svg.matches("<circle cx").count(), 2, "one branch point plus the legend marker");
    assert!(svg.contains(r#"class="loop""#));
    assert!(svg.contains(">s1</text>"));
    assert_eq!(svg, render_plane_svg(&g, Some(&l), &b).unwrap());
}

#[test]
fn empty_region_is_rejected() {
    let (f, b) = analyze(&parse_polynomial("w^2 - z").unwrap(), DEFAULT_BUDGET, None).unwrap();
    let mut g = sample_bplus(&f, &b, Region::new(-2.0, -2.0, 2.0, 2.0).unwrap(), 4).unwrap();
    g.region.x1 = g.region.x0;
    assert!(render_plane_svg(&g, None, &b).is_err());
}

#[test]
fn braid_pictures() {
    let one = render_braid_svg(&BraidWord::parse(2, "s1").unwrap());
    assert_eq!(one.matches(r#"class="crossing pos""#).count(), 1);
    let w = BraidWord::parse(3, "s1 s2 s2 s2 s1 s2^-1 s2^-1 s2^-1").unwrap();
    let svg = render_braid_svg(&w);
    assert_eq!(svg.matches(r#"class="crossing"#).count(), 8);
    assert_eq!(svg.matches(r#"class="crossing neg""#).count(), 3);
    assert_eq!(svg, render_braid_svg(&w));
    let empty = render_braid_svg(&BraidWord::identity(3).unwrap());
    assert_eq!(empty.matches("crossing").count(), 0);
    assert_eq!(empty.matches(r#"class="strand""#).count(), 6);
}
