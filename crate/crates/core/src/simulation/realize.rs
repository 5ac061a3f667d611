use crate::acts::{SysAct, UserAct, UserActType};
use crate::domain::{same_value, Ontology, DONTCARE};
use crate::nlu::{parse_in_context, NluRuleSet};

fn spaced(slot: &str) -> String {
    slot.replace('_', " ")
}

fn candidates(act: &UserAct, ontology: &Ontology) -> Vec<String> {
    let slot = act.slot.as_deref().unwrap_or_default();
    match act.act_type {
        UserActType::Inform => {
            let value = act.value.as_deref().unwrap_or_default();
            if same_value(value, DONTCARE) {
                return vec![
                    "i don't care".into(),
                    format!("any kind of {}", spaced(slot)),
                    format!("the {} does not matter", spaced(slot)),
                ];
            }
            let mut surfaces: Vec<String> = ontology
                .synonyms
                .get(slot)
                .into_iter()
                .flatten()
                .filter(|(_, canonical)| same_value(canonical, value))
                .map(|(surface, _)| surface.clone())
                .collect();
            surfaces.sort_by_key(|s| s.len());
            surfaces.push(value.to_string());
            surfaces.iter().flat_map(|s| [format!("i want {s}"), s.clone()]).collect()
        }
        UserActType::Request => vec![
            format!("tell me the {}", spaced(slot)),
            format!("tell me the {} status", spaced(slot)),
            format!("what is the {}", spaced(slot)),
            format!("is it {}", spaced(slot)),
        ],
        UserActType::Hello => vec!["hello".into()],
        UserActType::Bye => vec!["bye".into()],
        UserActType::Thanks => vec!["thanks".into()],
        UserActType::Affirm => vec!["yes".into()],
        UserActType::Deny => vec!["no".into()],
        UserActType::RequestAlternatives => vec!["something else".into()],
        UserActType::SelectDomain => ontology.keywords.first().cloned().into_iter().collect(),
        UserActType::Bad => vec!["hmm".into()],
    }
}

fn same_act(a: &UserAct, b: &UserAct, ontology: &Ontology) -> bool {
    let value_eq = match (a.slot.as_deref(), a.value.as_deref(), b.value.as_deref()) {
        (Some(slot), Some(x), Some(y)) => {
            same_value(x, y)
                || ontology.canonical_value(slot, x).zip(ontology.canonical_value(slot, y)).is_some_and(|(p, q)| p == q)
        }
        (_, x, y) => x == y,
    };
    a.act_type == b.act_type && a.slot == b.slot && value_eq
}

/// Surface text for a user turn: per act, the first candidate phrasing that
/// the domain's NLU maps back to that act in the given context.
pub fn realize_user_acts(acts: &[UserAct], ontology: &Ontology, rules: &NluRuleSet, context: Option<&SysAct>) -> String {
    let pieces: Vec<String> = acts
        .iter()
        .map(|act| {
            let options = candidates(act, ontology);
            options
                .iter()
                .find(|text| {
                    let parsed = parse_in_context(text, ontology, rules, context);
                    parsed.len() == 1 && same_act(&parsed[0], act, ontology)
                })
                .or(options.first())
                .cloned()
                .unwrap_or_default()
        })
        .collect();
    pieces.join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::nlu::parse;

    #[test]
    fn realized_turns_parse_back() {
        let o = fixtures::mensa_ontology();
        let rules = fixtures::mensa_rules();
        let turns = [
            vec![UserAct::inform("dish_type", "main dish")],
            vec![UserAct::inform("vegan", "true")],
            vec![UserAct::inform("vegan", "false")],
            vec![UserAct::request("price")],
            vec![UserAct::request("vegan")],
            vec![UserAct::request("dish_type"), UserAct::request("allergens")],
            vec![UserAct::new(UserActType::Bye)],
        ];
        for acts in turns {
            let text = realize_user_acts(&acts, &o, &rules, None);
            assert_eq!(parse(&text, &o, &rules), acts, "{text}");
        }
        let ctx = SysAct::request("vegan");
        let text = realize_user_acts(&[UserAct::inform("vegan", DONTCARE)], &o, &rules, Some(&ctx));
        assert_eq!(parse_in_context(&text, &o, &rules, Some(&ctx)), [UserAct::inform("vegan", DONTCARE)]);
    }
}
