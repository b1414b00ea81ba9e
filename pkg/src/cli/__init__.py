# CLI package initialization

