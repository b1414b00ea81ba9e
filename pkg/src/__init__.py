# Package initialization

