//! Blocking HTTP transport for the revisions API.

use std::time::Duration;

use reqwest::blocking::Client;
use serde_json::Value;
use wikidispute_core::config::ApiConfig;
use wikidispute_core::ingest::{ApiTransport, TransportError};

pub struct HttpTransport {
    client: Client,
}

impl HttpTransport {
    pub fn new(config: &ApiConfig) -> anyhow::Result<Self> {
        let client = Client::builder()
            .user_agent(config.user_agent.clone())
            .timeout(Duration::from_secs(120))
            .build()?;
        Ok(HttpTransport { client })
    }
}

impl ApiTransport for HttpTransport {
    fn get(&self, endpoint: &str, params: &[(String, String)]) -> Result<Value, TransportError> {
        let response = self
            .client
            .get(endpoint)
            .query(params)
            .send()
            .map_err(|e| TransportError::Network(e.to_string()))?;
        let status = response.status();
        if status.as_u16() == 429 {
            return Err(TransportError::RateLimited);
        }
        if !status.is_success() {
            return Err(TransportError::Status(status.as_u16()));
        }
        response
            .json::<Value>()
            .map_err(|e| TransportError::Network(format!("invalid JSON body: {e}")))
    }
}
