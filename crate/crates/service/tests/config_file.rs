use std::path::PathBuf;

use wander_service::config::ServiceConfig;

#[test]
fn shipped_example_config_loads() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../wander.toml");
    let cfg = ServiceConfig::load(path).unwrap();
    assert_eq!(cfg, ServiceConfig::default());
}
