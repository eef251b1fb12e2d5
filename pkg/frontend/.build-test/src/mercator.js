/** Web Mercator math for the map viewport (same convention as the server). */
export const TILE_SIZE = 256;
export const MAX_LATITUDE = 85.05112878;
export const MAX_ZOOM = 22;
export function latLonToWorldPx(lat, lon, z) {
    const size = TILE_SIZE * Math.pow(2, z);
    const phi = (lat * Math.PI) / 180;
    const x = ((lon + 180) / 360) * size;
    const y = ((1 - Math.log(Math.tan(phi) + 1 / Math.cos(phi)) / Math.PI) / 2) * size;
    return [Math.min(Math.max(x, 0), size), Math.min(Math.max(y, 0), size)];
}
export function worldPxToLatLon(x, y, z) {
    const size = TILE_SIZE * Math.pow(2, z);
    const lon = (x / size) * 360 - 180;
    const lat = (Math.atan(Math.sinh(Math.PI * (1 - (2 * y) / size))) * 180) / Math.PI;
    return [lat, lon];
}
