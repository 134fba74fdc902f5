# CLI package
