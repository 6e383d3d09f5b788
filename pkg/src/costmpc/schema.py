"""Version tag written into every JSON/CSV artifact this package produces."""

SCHEMA_VERSION = 1
