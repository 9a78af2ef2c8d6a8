//! End-to-end test of `histeval serve`: a real child process with the
//! built-in driver, exercised over HTTP until the driver completes.

use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

struct ServerProcess(Child);

impl Drop for ServerProcess {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

fn free_port() -> u16 {
    // Bind-then-release; the tiny reuse race is acceptable for a test.
    std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port()
}

async fn wait_for<F, T>(deadline: Duration, mut poll: F) -> T
where
    F: AsyncFnMut() -> Option<T>,
{
    let started = Instant::now();
    loop {
        if let Some(value) = poll().await {
            return value;
        }
        assert!(started.elapsed() < deadline, "timed out waiting for server");
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
}

#[tokio::test]
async fn serve_drives_traffic_and_reports_statistics() {
    let port = free_port();
    let base = format!("http://127.0.0.1:{port}");
    let _server = ServerProcess(
        Command::new(env!("CARGO_BIN_EXE_histeval"))
            .args([
                "serve",
                "--listen",
                &format!("127.0.0.1:{port}"),
                "--poll-interval-ms",
                "50",
                "--ports",
                "0",
                "--drive-port",
                "0",
                "--dist",
                "constant",
                "--value",
                "500000",
                "--drive-samples",
                "100000",
            ])
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn histeval serve"),
    );
    let client = reqwest::Client::new();

    // The API comes up...
    wait_for(Duration::from_secs(10), async || {
        client.get(format!("{base}/api/ports")).send().await.ok()
    })
    .await;

    // ...the driver idles until a histogram exists...
    let config = serde_json::json!({"min_ns": 0, "max_ns": 1_000_000, "num_bins": 10});
    let response = client
        .put(format!("{base}/api/histogram/0"))
        .json(&config)
        .send()
        .await
        .unwrap();
    assert_eq!(response.status(), 200);

    // ...then all 100k constant samples land in bin 5 ([500000, 599999]).
    let doc = wait_for(Duration::from_secs(30), async || {
        let doc: serde_json::Value = client
            .get(format!("{base}/api/histogram/0"))
            .send()
            .await
            .ok()?
            .json()
            .await
            .ok()?;
        (doc["total_packets"] == 100_000).then_some(doc)
    })
    .await;

    assert_eq!(doc["total_in_range"], 100_000);
    assert_eq!(doc["outliers"]["total"], 0);
    assert_eq!(doc["bins"][5]["count"], 100_000);
    assert_eq!(doc["mean_ns"], 549_999.5);
    assert_eq!(doc["stddev_ns"], 0.0);
}
