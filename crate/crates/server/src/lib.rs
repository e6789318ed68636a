//! JSON-over-HTTP facade for the curatr engine. All routes live under `/api`; every
//! non-2xx response carries one [`ApiError`] body.

mod error;
mod routes;
mod state;

use anyhow::{bail, Context};
use curatr_core::Store;
use tokio::net::TcpListener;

pub use error::ApiError;
pub use routes::{export_zip, router, RankRow, RecommendResponse, SearchResult};
pub use state::{model_ref_for, AppState, ComponentStatus, Components, Engine, ServeConfig};

/// Binds, then loads the engine in the background while already answering
/// `/api/health` (503 until every component is ready).
pub async fn serve(config: ServeConfig) -> anyhow::Result<()> {
    if !config.model_path.exists() && !config.train_if_missing {
        bail!(
            "model {} does not exist; train it first or pass --train",
            config.model_path.display()
        );
    }
    let store = Store::open(&config.state_dir)?;
    let addr = format!("{}:{}", config.host, config.port);
    let listener = TcpListener::bind(&addr)
        .await
        .with_context(|| format!("cannot bind {addr}"))?;
    tracing::info!("listening on http://{}", listener.local_addr()?);

    let state = AppState::new(config, store);
    let loader = state.clone();
    tokio::task::spawn_blocking(move || {
        if let Err(e) = loader.load() {
            tracing::error!("engine failed to load: {e:#}");
        }
    });

    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
