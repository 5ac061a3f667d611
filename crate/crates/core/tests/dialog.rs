use colloquy_core::system::{Conversation, SystemBuilder};

const SCRIPT: &[(&str, &str)] = &[
    (
        "I could have something to eat. What does the mensa offer today?",
        "What type of dish are you looking for?",
    ),
    ("I would like a main dish.", "Should the meal be vegan?"),
    ("Yes.", "The meal mediterranean Ebly wheat is served today, is a main dish and is vegan."),
    (
        "Okay, cool, I will go there now! What is the weather like?",
        "The weather in Stuttgart on January 28 at 3 PM is 3 degrees celsius with light snow.",
    ),
    ("Thank you, ADVISER, good bye!", "Thank you, good bye."),
];

#[test]
fn reference_dialog_reproduces_transcript() {
    let system = SystemBuilder::reference().build().unwrap();
    let mut convo = Conversation::new(system, false);
    let greeting = convo.start().unwrap();
    assert_eq!(
        greeting.utterances,
        vec!["Hello, please let me know how I can help you, I can discuss the following domains: Mensa Food and Weather."]
    );
    for (i, (user, expected)) in SCRIPT.iter().enumerate() {
        let turn = convo.say(user).unwrap();
        assert_eq!(turn.utterances, vec![expected.to_string()], "turn {i}: {user}");
        assert_eq!(turn.ended, i + 1 == SCRIPT.len());
    }
    assert!(convo.is_ended());
}
