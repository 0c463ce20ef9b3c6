use std::collections::BTreeMap;

use cobra_core::config::{
    diff_settings, parse_config, reference, resolve, ConfigError, ConfigTree, Scalar,
};
use proptest::prelude::*;

fn key() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 1..=3)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    /// Sequential assignments into a plain map keyed by dotted path, where
    /// an assignment removes everything below or above it on the same
    /// path, agree with the parser.
    #[test]
    fn last_write_wins(assignments in prop::collection::vec((key(), 0i64..100), 0..12)) {
        let mut text = String::new();
        let mut oracle: BTreeMap<String, i64> = BTreeMap::new();
        let mut conflict = false;
        for (path, value) in &assignments {
            let dotted = path.join(".");
            // A scalar at a strict prefix would be reopened as an object.
            let reopens = (1..path.len()).any(|i| oracle.contains_key(&path[..i].join(".")));
            if reopens {
                conflict = true;
                break;
            }
            oracle.retain(|k, _| !k.starts_with(&format!("{dotted}.")));
            oracle.insert(dotted.clone(), *value);
            text.push_str(&format!("{dotted} = {value}\n"));
        }
        if conflict {
            return Ok(());
        }
        let tree = parse_config(&text).unwrap();
        let got: BTreeMap<String, i64> = tree
            .leaves()
            .into_iter()
            .map(|(k, v)| match v {
                Scalar::Int(i) => (k, *i),
                other => panic!("unexpected {other:?}"),
            })
            .collect();
        prop_assert_eq!(got, oracle);
    }

    #[test]
    fn errors_point_inside_the_input(text in "[a-c.={}\"# \n:12]{0,24}") {
        if let Err(e) = parse_config(&text) {
            let (line, col) = match e {
                ConfigError::Syntax { line, col, .. } => (line, col),
                ConfigError::PathConflict { line, col, .. } => (line, col),
            };
            let lines: Vec<&str> = text.split('\n').collect();
            prop_assert!(line >= 1 && line <= lines.len(), "line {} of {:?}", line, text);
            prop_assert!(col >= 1 && col <= lines[line - 1].chars().count() + 1);
        }
    }

    #[test]
    fn override_idempotence(port in 1i64..65535, title in "[a-z ]{1,10}", infos: bool) {
        let defaults = reference();
        let text = format!("binding.port = {port}\ntitle = \"{title}\"\ndisplay.infos = {infos}\n");
        let user = parse_config(&text).unwrap();
        let once = resolve(&user, &defaults).unwrap();
        let twice = resolve(&defaults.merged_with(&user), &defaults).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert!(diff_settings(&once.settings, &once.settings).is_empty());
    }
}

#[test]
fn empty_user_tree_always_resolves() {
    let r = resolve(&ConfigTree::new("empty"), &reference()).unwrap();
    assert_eq!(r.settings.binding_port, 8080);
    assert!(r.warnings.is_empty());
}
