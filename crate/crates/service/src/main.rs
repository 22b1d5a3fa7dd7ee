use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::Parser;
use ihvc_service::{router, spawn_expiry, ServiceConfig, SessionStore};

#[derive(Parser)]
#[command(name = "ihvc-service", about = "Session-based decoding, editing and rendering over HTTP")]
struct Args {
    #[arg(long, default_value_t = 8787)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Directory with the static client bundle.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
    /// Minutes a session may stay idle before it is dropped.
    #[arg(long, default_value_t = 30)]
    idle_minutes: u64,
    /// Rendered frames kept in the shared PNG cache.
    #[arg(long, default_value_t = 64)]
    cache_frames: usize,
}

#[tokio::main]
async fn main() {
    let args = Args::parse();
    let config = ServiceConfig {
        cache_frames: args.cache_frames,
        idle_timeout: Duration::from_secs(args.idle_minutes * 60),
        ui_dir: args.ui_dir,
    };
    let store = Arc::new(SessionStore::new(config.cache_frames, config.idle_timeout));
    spawn_expiry(store.clone(), Duration::from_secs(60));
    let app = router(store, &config);

    let addr: SocketAddr = match format!("{}:{}", args.host, args.port).parse() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: bad listen address: {e}");
            std::process::exit(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot listen on {addr}: {e}");
            std::process::exit(1);
        }
    };
    eprintln!("listening on http://{addr}");
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    if let Err(e) = axum::serve(listener, app).with_graceful_shutdown(shutdown).await {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
