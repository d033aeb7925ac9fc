import os

ENV = os.getenv("COINTOSS_ENV", "local").strip().lower()

LOG_LEVEL = os.getenv("COINTOSS_LOG_LEVEL", "WARNING").strip().upper()

# Enumeration over F_n touches 2^n cylinders; 22 is about 4M.
ENUMERATION_CAP = int(os.getenv("COINTOSS_ENUMERATION_CAP", "22"))

if ENV == "test":
    DATABASE_URL = "sqlite://"
else:
    DATABASE_URL = os.getenv("COINTOSS_DB_URL", "sqlite:///./cointoss_runs.db")
