# Package for kaa
