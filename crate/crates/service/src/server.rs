use std::net::SocketAddr;
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use tokio::sync::oneshot;

use crate::outbox::FileTransport;
use crate::service::Service;
use crate::{router, ServiceConfig, ServiceError};

fn runtime() -> Result<tokio::runtime::Runtime, ServiceError> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

async fn outbox_loop(service: Arc<Service>, every: Duration) {
    let mut tick = tokio::time::interval(every);
    loop {
        tick.tick().await;
        let svc = service.clone();
        let res = tokio::task::spawn_blocking(move || svc.drain_outbox(&mut FileTransport::new(svc.outbox_dir()))).await;
        match res {
            Ok(Ok(r)) if r.delivered + r.failed > 0 => log::info!("outbox: {} delivered, {} failed", r.delivered, r.failed),
            Ok(Err(e)) => log::warn!("outbox drain failed: {e}"),
            _ => {}
        }
    }
}

/// Runs the service until Ctrl-C.
pub fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let service = Arc::new(Service::open(config)?);
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&service.config().listen).await?;
        log::info!("listening on {}", listener.local_addr()?);
        let interval = service.config().outbox_interval_ms;
        if interval > 0 {
            tokio::spawn(outbox_loop(service.clone(), Duration::from_millis(interval)));
        }
        axum::serve(listener, router(service))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}

/// A server on its own thread and runtime; stops when dropped.
pub struct RunningServer {
    pub addr: SocketAddr,
    pub service: Arc<Service>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl RunningServer {
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for RunningServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Starts `service` on an ephemeral localhost port. The outbox is drained
/// only on request.
pub fn spawn_background(service: Arc<Service>) -> Result<RunningServer, ServiceError> {
    let rt = runtime()?;
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0"))?;
    let addr = listener.local_addr()?;
    let (tx, rx) = oneshot::channel();
    let app = router(service.clone());
    let thread = std::thread::spawn(move || {
        rt.block_on(async move {
            let _ = axum::serve(listener, app)
                .with_graceful_shutdown(async {
                    let _ = rx.await;
                })
                .await;
        });
    });
    Ok(RunningServer {
        addr,
        service,
        shutdown: Some(tx),
        thread: Some(thread),
    })
}
