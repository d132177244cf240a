namespace qsurf {}
