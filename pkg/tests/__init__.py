# Test suite for SubtitleMaker
