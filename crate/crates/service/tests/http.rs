use std::sync::Arc;

use gdl_reward::rewards::score_candidates;
use gdl_reward::{Grammar, RewardConfig, SeedPolicy, SHIPPED_CORPUS};
use gdl_reward_service::{serve_with, AppState, ErrorBody, Health, RewardResponse};
use serde_json::json;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

struct Server {
    base: String,
    stop: Option<oneshot::Sender<()>>,
    handle: tokio::task::JoinHandle<std::io::Result<()>>,
}

impl Server {
    async fn start() -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let state = Arc::new(AppState::new(
            Grammar::ludilite(),
            RewardConfig::default(),
            16,
        ));
        let (tx, rx) = oneshot::channel();
        let handle = tokio::spawn(serve_with(listener, state, async {
            let _ = rx.await;
        }));
        Server {
            base,
            stop: Some(tx),
            handle,
        }
    }

    async fn shutdown(mut self) {
        self.stop.take().unwrap().send(()).unwrap();
        self.handle.await.unwrap().unwrap();
    }
}

fn corpus() -> Vec<String> {
    gdl_reward::dataset::parse_instances(SHIPPED_CORPUS)
        .unwrap()
        .into_iter()
        .map(|i| i.description)
        .collect()
}

#[tokio::test(flavor = "multi_thread")]
async fn reward_matches_library_and_caches() {
    let server = Server::start().await;
    let client = reqwest::Client::new();
    let games = corpus();
    let candidates = vec![
        games[0].clone(),
        games[3].clone(),
        "(game \"x\"".to_string(),
    ];
    let body = json!({"reference": games[0], "candidates": candidates, "request_id": "abc"});

    let first: RewardResponse = client
        .post(format!("{}/v1/reward", server.base))
        .json(&body)
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    let second: RewardResponse = client
        .post(format!("{}/v1/reward", server.base))
        .json(&body)
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();

    let (gt, lib) = score_candidates(
        &games[0],
        &candidates,
        &Grammar::ludilite(),
        &RewardConfig::default(),
        SeedPolicy::ContentHash,
    )
    .unwrap();
    assert_eq!(first.reference_concepts, gt);
    assert_eq!(first.breakdowns, lib.breakdowns);
    assert_eq!(first.advantages, lib.advantages);
    assert_eq!(first.request_id.as_deref(), Some("abc"));
    assert!(!first.cache_hit && second.cache_hit);
    assert_eq!(second.breakdowns, first.breakdowns);
    assert_eq!(second.advantages, first.advantages);
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn errors_health_and_config() {
    let server = Server::start().await;
    let client = reqwest::Client::new();
    let post = |body: serde_json::Value| {
        client
            .post(format!("{}/v1/reward", server.base))
            .json(&body)
            .send()
    };
    let games = corpus();

    let r = post(json!({"reference": games[0], "candidates": []}))
        .await
        .unwrap();
    assert_eq!(r.status(), 422);
    assert_eq!(
        r.json::<ErrorBody>().await.unwrap().code,
        "validation-error"
    );

    let r = post(json!({"reference": games[0], "candidates": ["x"], "config": {"sigma": 0.0}}))
        .await
        .unwrap();
    assert_eq!(
        r.json::<ErrorBody>().await.unwrap().code,
        "validation-error"
    );

    let r = post(json!({"reference": games[0], "candidates": ["x"], "bogus": 1}))
        .await
        .unwrap();
    assert_eq!(
        r.json::<ErrorBody>().await.unwrap().code,
        "validation-error"
    );

    let stuck = games[0]
        .replace("(is Full)", "(is Line 9)")
        .replace("(is Line 3)", "(is Line 9)");
    let r = post(json!({"reference": stuck, "candidates": ["x"]}))
        .await
        .unwrap();
    assert_eq!(r.status(), 422);
    assert_eq!(
        r.json::<ErrorBody>().await.unwrap().code,
        "reference-not-functional"
    );

    let health: Health = client
        .get(format!("{}/v1/health", server.base))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(health.status, "ok");
    assert_eq!(health.version, gdl_reward_service::VERSION);

    let cfg: RewardConfig = client
        .get(format!("{}/v1/config", server.base))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(cfg, RewardConfig::default());
    server.shutdown().await;
}

#[tokio::test(flavor = "multi_thread")]
async fn concurrent_requests_agree() {
    let server = Server::start().await;
    let client = reqwest::Client::new();
    let games = corpus();
    let body = json!({"reference": games[1], "candidates": [games[1], games[2]], "seed": 7});
    let send = || async {
        client
            .post(format!("{}/v1/reward", server.base))
            .json(&body)
            .send()
            .await
            .unwrap()
            .json::<RewardResponse>()
            .await
            .unwrap()
    };
    let (a, b, c) = tokio::join!(send(), send(), send());
    assert_eq!(a.breakdowns, b.breakdowns);
    assert_eq!(b.breakdowns, c.breakdowns);
    assert_eq!(a.reference_concepts, c.reference_concepts);
    server.shutdown().await;
}
