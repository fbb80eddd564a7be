//! Bundled scenarios built on the eight-movie example: client set
//! `{A,C,D,G}`, server set `{B,C,D,G,H}`, scores maximized.

use crate::model::Scenario;

pub const MOVIES_JSON: &str = include_str!("../fixtures/movies.json");
pub const MOVIES_MAP2_JSON: &str = include_str!("../fixtures/movies_map2.json");
pub const MOVIES_MAP3_JSON: &str = include_str!("../fixtures/movies_map3.json");

/// Scores B,E,H=5; A,C,G=4; D=3; F=2. Optimum `{C,G}`.
pub fn movies() -> Scenario {
    Scenario::from_json(MOVIES_JSON).expect("bundled fixture is valid")
}

/// As [`movies`] but with C and G lowered to 3. Optimum `{C,D,G}`.
pub fn movies_map2() -> Scenario {
    Scenario::from_json(MOVIES_MAP2_JSON).expect("bundled fixture is valid")
}

/// G scores 5, everything else 4. Optimum `{G}`.
pub fn movies_map3() -> Scenario {
    Scenario::from_json(MOVIES_MAP3_JSON).expect("bundled fixture is valid")
}

/// All bundled fixtures with their names.
pub fn all() -> Vec<(&'static str, Scenario)> {
    vec![("movies", movies()), ("movies_map2", movies_map2()), ("movies_map3", movies_map3())]
}
