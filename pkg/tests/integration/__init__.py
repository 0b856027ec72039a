# Integration tests - tests with mocked external dependencies
