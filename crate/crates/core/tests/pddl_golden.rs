use brap_core::pddl::emit_domain;

fn normalized(s: &str) -> Vec<String> {
    s.lines().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect()
}

#[test]
fn domain_matches_published_listing() {
    let golden = include_str!("golden/domain.pddl");
    assert_eq!(normalized(&emit_domain()), normalized(golden));
}

#[test]
fn domain_is_stable() {
    let d = emit_domain();
    assert_eq!(d, emit_domain());
    assert!(d.contains(":requirements :strips :action-costs"));
    assert!(d.contains("(:action slide_tgt"));
    assert!(d.contains(":precondition  (and (tgt ?from) (fre ?to) (adjacent ?from ?to))"));
}
