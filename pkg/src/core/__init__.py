# Core package initialization

