//! Scenario files shipped with the binary.

pub const BUNDLED: [(&str, &str); 7] = [
    ("fixtureA", include_str!("../scenarios/fixtureA.scn")),
    ("fixtureB", include_str!("../scenarios/fixtureB.scn")),
    ("fixtureC", include_str!("../scenarios/fixtureC.scn")),
    ("fixtureD", include_str!("../scenarios/fixtureD.scn")),
    ("fixtureF", include_str!("../scenarios/fixtureF.scn")),
    ("fixtureB-lift", include_str!("../scenarios/fixtureB-lift.scn")),
    ("curved", include_str!("../scenarios/curved.scn")),
];

/// Look up by name, with or without the `.scn` suffix.
pub fn bundled(name: &str) -> Option<&'static str> {
    let name = name.strip_suffix(".scn").unwrap_or(name);
    BUNDLED.iter().find(|(k, _)| *k == name).map(|(_, v)| *v)
}
