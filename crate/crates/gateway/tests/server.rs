use std::net::SocketAddr;
use std::time::Duration;

use colloquy_core::state::{BeliefState, UserState};
use colloquy_gateway::{AppState, ErrorCode, ServerEvent, Session, SessionConfig, Speaker, TranscriptEntry};
use futures_util::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Socket = WebSocketStream<MaybeTlsStream<TcpStream>>;

const WELCOME: &str =
    "Hello, please let me know how I can help you, I can discuss the following domains: Mensa Food and Weather.";

const SCRIPT: &[(&str, &str)] = &[
    ("I could have something to eat. What does the mensa offer today?", "What type of dish are you looking for?"),
    ("I would like a main dish.", "Should the meal be vegan?"),
    ("Yes.", "The meal mediterranean Ebly wheat is served today, is a main dish and is vegan."),
    (
        "Okay, cool, I will go there now! What is the weather like?",
        "The weather in Stuttgart on January 28 at 3 PM is 3 degrees celsius with light snow.",
    ),
    ("Thank you, ADVISER, good bye!", "Thank you, good bye."),
];

async fn start() -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(colloquy_gateway::serve(listener, AppState::new()));
    addr
}

async fn create(addr: SocketAddr, body: Value) -> (u16, Value) {
    let r = reqwest::Client::new().post(format!("http://{addr}/session")).json(&body).send().await.unwrap();
    (r.status().as_u16(), r.json().await.unwrap())
}

async fn open(addr: SocketAddr, id: &str) -> Socket {
    connect_async(format!("ws://{addr}/ws/session/{id}")).await.unwrap().0
}

async fn next(ws: &mut Socket) -> ServerEvent {
    loop {
        let msg = tokio::time::timeout(Duration::from_secs(20), ws.next()).await.expect("timed out").unwrap().unwrap();
        if let Message::Text(t) = msg {
            return serde_json::from_str(t.as_str()).unwrap();
        }
    }
}

async fn send(ws: &mut Socket, event: Value) {
    ws.send(Message::Text(event.to_string().into())).await.unwrap();
}

/// Events up to and including the state that follows the system's reply,
/// plus the `ended` event when the dialog closes.
async fn turn(ws: &mut Socket, text: &str) -> Vec<ServerEvent> {
    send(ws, json!({"type": "utterance", "text": text})).await;
    let mut out = Vec::new();
    loop {
        let e = next(ws).await;
        let done = matches!(e, ServerEvent::State { .. } | ServerEvent::Error { .. });
        out.push(e);
        if done {
            break;
        }
    }
    out
}

fn said(events: &[ServerEvent]) -> Vec<(String, usize)> {
    events
        .iter()
        .filter_map(|e| match e {
            ServerEvent::SysUtterance { text, turn } => Some((text.clone(), *turn)),
            _ => None,
        })
        .collect()
}

#[tokio::test(flavor = "multi_thread")]
async fn health_and_session_errors() {
    let addr = start().await;
    let health: Value = reqwest::get(format!("http://{addr}/healthz")).await.unwrap().json().await.unwrap();
    assert_eq!(health["status"], "ok");

    let (status, body) = create(addr, json!({"domains": []})).await;
    assert_eq!(status, 400);
    assert_eq!(body["code"], "unknown_domain");
    let (status, body) = create(addr, json!({"domains": ["mensa", "trains"]})).await;
    assert_eq!(status, 400);
    assert_eq!(body["code"], "unknown_domain");
    let (status, body) = create(addr, json!({"colour": "blue"})).await;
    assert_eq!(status, 400);
    assert_eq!(body["code"], "bad_request");

    let r = reqwest::get(format!("http://{addr}/session/nope/graph")).await.unwrap();
    assert_eq!(r.status().as_u16(), 404);
    assert!(connect_async(format!("ws://{addr}/ws/session/nope")).await.is_err());
}

#[tokio::test(flavor = "multi_thread")]
async fn graph_is_served_as_dot() {
    let addr = start().await;
    let (status, body) = create(addr, json!({})).await;
    assert_eq!(status, 201);
    let id = body["id"].as_str().unwrap();
    assert_eq!(body["socket"], format!("/ws/session/{id}"));
    let r = reqwest::get(format!("http://{addr}/session/{id}/graph")).await.unwrap();
    assert!(r.headers()["content-type"].to_str().unwrap().starts_with("text/vnd.graphviz"));
    let dot = r.text().await.unwrap();
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("policy.mensa"), "{dot}");
}

#[tokio::test(flavor = "multi_thread")]
async fn reference_dialog_over_the_socket() {
    let addr = start().await;
    let (_, body) = create(addr, json!({"affective": false})).await;
    let id = body["id"].as_str().unwrap().to_string();
    let mut ws = open(addr, &id).await;

    assert_eq!(next(&mut ws).await, ServerEvent::Domain { active: None });
    assert_eq!(next(&mut ws).await, ServerEvent::SysUtterance { text: WELCOME.into(), turn: 0 });
    assert!(matches!(next(&mut ws).await, ServerEvent::State { .. }));

    let mut domains = Vec::new();
    for (i, (user, system)) in SCRIPT.iter().enumerate() {
        let events = turn(&mut ws, user).await;
        assert_eq!(said(&events), vec![(system.to_string(), i + 1)]);
        for e in &events {
            match e {
                ServerEvent::Domain { active } => domains.push(active.clone().unwrap()),
                ServerEvent::State { belief, user } => {
                    let b: BeliefState = serde_json::from_value(belief.clone()).unwrap();
                    assert!(b.history.len() == b.turn + 1);
                    assert!(user.is_null());
                }
                _ => {}
            }
        }
    }
    assert_eq!(next(&mut ws).await, ServerEvent::Ended);
    assert_eq!(domains, vec!["mensa", "weather"]);

    let events = turn(&mut ws, "hello again").await;
    assert!(matches!(&events[..], [ServerEvent::Error { code: ErrorCode::SessionTerminated, .. }]));

    let transcript: Vec<TranscriptEntry> =
        reqwest::get(format!("http://{addr}/session/{id}/transcript")).await.unwrap().json().await.unwrap();
    assert_eq!(transcript.len(), 1 + 2 * SCRIPT.len());
    for (i, entry) in transcript.iter().enumerate() {
        let expected = if i % 2 == 0 { Speaker::System } else { Speaker::User };
        assert_eq!(entry.speaker, expected, "entry {i}");
        assert_eq!(entry.turn, i.div_ceil(2));
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn social_signals_reach_the_user_state() {
    let addr = start().await;
    let (_, body) = create(addr, json!({})).await;
    let mut ws = open(addr, body["id"].as_str().unwrap()).await;
    for _ in 0..3 {
        next(&mut ws).await;
    }
    send(&mut ws, json!({"type": "social", "valence": "positive", "arousal": "high", "emotion": "ecstatic", "engagement": "looking"})).await;
    assert!(matches!(next(&mut ws).await, ServerEvent::Error { code: ErrorCode::InvalidLabel, .. }));
    send(&mut ws, json!({"type": "dance"})).await;
    assert!(matches!(next(&mut ws).await, ServerEvent::Error { code: ErrorCode::BadRequest, .. }));

    send(&mut ws, json!({"type": "social", "valence": "negative", "arousal": "low", "emotion": "sad", "engagement": "not_looking"})).await;
    let events = turn(&mut ws, "What does the mensa offer today?").await;
    let Some(ServerEvent::State { user, .. }) = events.last() else { panic!("{events:?}") };
    let state: UserState = serde_json::from_value(user.clone()).unwrap();
    assert_eq!(state.current.emotion.to_string(), "sad");
    assert_eq!(state.current.engagement.to_string(), "not_looking");

    send(&mut ws, json!({"type": "end_dialog"})).await;
    assert_eq!(next(&mut ws).await, ServerEvent::Ended);
    send(&mut ws, json!({"type": "end_dialog"})).await;
    assert!(matches!(next(&mut ws).await, ServerEvent::Error { code: ErrorCode::SessionTerminated, .. }));
}

#[tokio::test(flavor = "multi_thread")]
async fn interleaved_sessions_stay_isolated() {
    let mensa = ["What does the mensa offer today?", "I would like a dessert.", "No.", "What does it cost?"];
    let weather = ["What is the weather like?", "And tomorrow in Berlin?", "Thank you, good bye!"];
    let solo = |lines: &[&str]| {
        let mut s = Session::create("solo", &SessionConfig::default()).unwrap();
        for l in lines {
            s.post_utterance(l).unwrap();
        }
        s.transcript().to_vec()
    };
    let (want_a, want_b) = (solo(&mensa), solo(&weather));

    let addr = start().await;
    let (_, a) = create(addr, json!({})).await;
    let (_, b) = create(addr, json!({})).await;
    let (ida, idb) = (a["id"].as_str().unwrap().to_string(), b["id"].as_str().unwrap().to_string());
    assert_ne!(ida, idb);
    let (mut wa, mut wb) = (open(addr, &ida).await, open(addr, &idb).await);
    for _ in 0..3 {
        next(&mut wa).await;
        next(&mut wb).await;
    }
    for i in 0..mensa.len().max(weather.len()) {
        if let Some(l) = weather.get(i) {
            send(&mut wb, json!({"type": "utterance", "text": l})).await;
        }
        if let Some(l) = mensa.get(i) {
            send(&mut wa, json!({"type": "utterance", "text": l})).await;
        }
    }
    let mut got_a = Vec::new();
    while got_a.len() < mensa.len() {
        if let ServerEvent::SysUtterance { text, .. } = next(&mut wa).await {
            got_a.push(text);
        }
    }
    let mut got_b = Vec::new();
    loop {
        match next(&mut wb).await {
            ServerEvent::SysUtterance { text, .. } => got_b.push(text),
            ServerEvent::Ended => break,
            _ => {}
        }
    }

    let fetch = |id: String| async move {
        reqwest::get(format!("http://{addr}/session/{id}/transcript"))
            .await
            .unwrap()
            .json::<Vec<TranscriptEntry>>()
            .await
            .unwrap()
    };
    let (ta, tb) = (fetch(ida).await, fetch(idb).await);
    assert_eq!(ta, want_a);
    assert_eq!(tb, want_b);
    let system = |t: &[TranscriptEntry]| -> Vec<String> {
        t.iter().skip(1).filter(|e| e.speaker == Speaker::System).map(|e| e.text.clone()).collect()
    };
    assert_eq!(got_a, system(&ta));
    assert_eq!(got_b, system(&tb));
}
