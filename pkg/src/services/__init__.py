# Orchestration services
