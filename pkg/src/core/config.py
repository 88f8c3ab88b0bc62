from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    LOG_LEVEL: str = "WARNING"
    DEFAULT_SEED: int = 0
    DEFAULT_TRIALS: int = 100_000
    PARALLEL: int = 1
    MU_GRID_STEP: float = 0.005
    OOC_SEARCH_LIMIT: int = 2_000_000
    LBS_MAX_ATTEMPTS: int = 10_000
    WDM_SCAN_LIMIT: int = 128
    MODEL_GAP_THRESHOLD: float = 0.05

    model_config = SettingsConfigDict(env_file=".env", env_prefix="QKDNET_", extra="ignore")


settings = Settings()
