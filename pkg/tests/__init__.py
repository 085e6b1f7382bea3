# Tests package for unit and integration tests