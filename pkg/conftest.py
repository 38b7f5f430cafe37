# examples/ is a read-only reference corpus, not part of this package's suite
collect_ignore = ["examples", "demos"]
