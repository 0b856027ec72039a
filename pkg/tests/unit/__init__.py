# Unit tests - fast tests without external dependencies
