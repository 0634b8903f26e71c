# Data models for distbeam
