from paraview.simple import *

reader = OpenDataFile('ml-100.vtk')
contour = Contour(Input=reader)
contour.ContourBy = ['POINTS', 'var0']
contour.Isosurfaces = [0.5]
view = GetActiveViewOrCreate('RenderView')
display = Show(contour, view)
ColorBy(display, ('POINTS', 'var0'))
view.Background = [1.0, 1.0, 1.0]
view.ResetActiveCameraToNegativeZ()
ResetCamera()
SaveScreenshot('iso.png', view, ImageResolution=[64, 48])
